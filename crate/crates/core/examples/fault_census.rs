use qdtest_core::envs::TaxiWorld;
use qdtest_core::mdp::{run_episode, EnvId, SolutionInput, Termination};
use qdtest_core::policies::{solve_rate, train_q_learning, TrainParams};

fn main() {
    let mut world = TaxiWorld::builtin();
    for episodes in [200_000usize, 400_000, 800_000, 1_600_000] {
        let params = TrainParams { episodes, ..Default::default() };
        let table = train_q_learning(world.map(), &params);
        let rate = solve_rate(world.map(), &table, 1000, 999);
        let mut faults = Vec::new();
        for row in 0..13 {
            for col in 0..18 {
                for p in 0..6 {
                    for d in 0..6 {
                        if p == d { continue; }
                        let input = SolutionInput::new(
                            EnvId::Taxi,
                            vec![row as f64, col as f64, p as f64, d as f64],
                        );
                        let t = run_episode(&mut world, &table, &input, 0).unwrap();
                        if t.terminated_by == Termination::Fault {
                            faults.push((row, col, p, d));
                        }
                    }
                }
            }
        }
        // cluster: component count under +-1-in-one-coordinate adjacency
        let set: std::collections::HashSet<_> = faults.iter().cloned().collect();
        let mut seen = std::collections::HashSet::new();
        let mut components = 0;
        for f in &faults {
            if seen.contains(f) { continue; }
            components += 1;
            let mut stack = vec![*f];
            seen.insert(*f);
            while let Some((r, c, p, d)) = stack.pop() {
                let mut neighbors = Vec::new();
                for delta in [-1i64, 1] {
                    neighbors.push((r as i64 + delta, c as i64, p as i64, d as i64));
                    neighbors.push((r as i64, c as i64 + delta, p as i64, d as i64));
                    neighbors.push((r as i64, c as i64, p as i64 + delta, d as i64));
                    neighbors.push((r as i64, c as i64, p as i64, d as i64 + delta));
                }
                for (nr, nc, np, nd) in neighbors {
                    if nr < 0 || nc < 0 || np < 0 || nd < 0 { continue; }
                    let key = (nr as usize, nc as usize, np as usize, nd as usize);
                    if set.contains(&key) && !seen.contains(&key) {
                        seen.insert(key);
                        stack.push(key);
                    }
                }
            }
        }
        println!(
            "episodes={episodes}: solve={rate:.3} |faults|={} components={components}",
            faults.len()
        );
    }
}
