// Reconstruct the refractivity phantom from 450 rays with both solvers and
// print a short convergence summary.
#include <cstdio>

#include <gpstomo/gpstomo.hpp>

int main()
{
    using namespace gpstomo;
    ExperimentConfig cfg;
    cfg.lbfgs.max_iterations = 300;
    const Problem p = build_problem(cfg, 450, 0.001);
    std::printf("%zu rays, %zu nonzeros, noise delta %.3g\n", p.op.rows(), p.op.nonzeros(), p.noisy.delta);

    for (SolverKind s : {SolverKind::lbfgs, SolverKind::ldfp}) {
        const SolveResult r = run_solver(cfg, p, s, PenaltyKind::tv);
        std::printf("%-6s %4zu iterations  %-10s rel_error %.6f  %.3f s\n", to_string(s), r.iterations,
                    to_string(r.reason), r.records.back().rel_error.value_or(0.0), r.seconds);
    }

    const double ground = true_profile(p.grid, cfg.phantom)(0, 0, 0);
    std::printf("truth at the origin node: %.1f\n", ground);
}
