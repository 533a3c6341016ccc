//! Tabular Q-learning and value iteration, used as oracles for the network learner.

/// Q-values for two actions per discrete state.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub q: Vec<[f64; 2]>,
}

impl QTable {
    pub fn new(n_states: usize) -> Self {
        QTable { q: vec![[0.0; 2]; n_states] }
    }

    pub fn max(&self, s: usize) -> f64 {
        self.q[s][0].max(self.q[s][1])
    }

    /// Greedy action index, ties to 0 (no flip).
    pub fn greedy(&self, s: usize) -> usize {
        usize::from(self.q[s][1] > self.q[s][0])
    }
}

/// `Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))`; `next = None` is terminal.
pub fn tabular_q_update(table: &mut QTable, s: usize, a: usize, r: f64, next: Option<usize>, alpha: f64, gamma: f64) {
    let bootstrap = next.map_or(0.0, |n| table.max(n));
    let q = &mut table.q[s][a];
    *q += alpha * (r + gamma * bootstrap - *q);
}

/// Deterministic finite MDP: `step[s][a] = (reward, next state or None when terminal)`.
#[derive(Debug, Clone)]
pub struct FiniteMdp {
    pub step: Vec<[(f64, Option<usize>); 2]>,
}

impl FiniteMdp {
    /// Chain of `n` states: action 1 moves right (paying `move_cost`), action 0 stays
    /// and earns `stay_reward`; moving right out of the last state ends the episode
    /// with `exit_reward`.
    pub fn chain(n: usize, stay_reward: f64, move_cost: f64, exit_reward: f64) -> Self {
        let step = (0..n)
            .map(|s| {
                let right = if s + 1 == n { (exit_reward, None) } else { (-move_cost, Some(s + 1)) };
                [(stay_reward, Some(s)), right]
            })
            .collect();
        FiniteMdp { step }
    }

    pub fn n_states(&self) -> usize {
        self.step.len()
    }
}

/// Optimal Q-values by value iteration, iterated until the sup-norm change is below `tol`.
pub fn value_iteration(mdp: &FiniteMdp, gamma: f64, tol: f64) -> QTable {
    let mut table = QTable::new(mdp.n_states());
    loop {
        let mut next = table.clone();
        let mut delta: f64 = 0.0;
        for (s, actions) in mdp.step.iter().enumerate() {
            for (a, &(r, ns)) in actions.iter().enumerate() {
                let v = r + gamma * ns.map_or(0.0, |n| table.max(n));
                delta = delta.max((v - table.q[s][a]).abs());
                next.q[s][a] = v;
            }
        }
        table = next;
        if delta < tol {
            return table;
        }
    }
}
