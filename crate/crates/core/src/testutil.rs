use crate::mdp::Mdp;

/// s0 absorbing with r=0, s1 absorbing with r=1, s2 moves to s0 (action 0)
/// or s1 (action 1) with r=0.
pub(crate) fn branch_mdp() -> Mdp {
    Mdp::new(
        3,
        2,
        vec![
            vec![vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
            vec![vec![0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0]],
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
        ],
        vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0]],
    )
    .unwrap()
}

/// Two states; action 0 stays, action 1 switches. Rewards favour staying in s1.
pub(crate) fn two_state_switch() -> Mdp {
    Mdp::new(
        2,
        2,
        vec![
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        ],
        vec![vec![0.0, 0.0], vec![1.0, 0.0]],
    )
    .unwrap()
}
