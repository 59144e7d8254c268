"""Error bounds and iteration schedules.

The root-mean-square error of the level-(n, m) estimator at the horizon is
bounded by  T sqrt(M2) (1+2LT)^n e^{LT + m/2} / m^{n/2}.  Coupling m = n
makes the bound eventually collapse superpolynomially, and n_epsilon picks
the first level whose whole coupled tail sits under a target accuracy.
"""

from mlpicard import BoundInputs, builtin, error_bound, n_epsilon, rv_exact

for name in ("pure_noise", "linear_meanfield"):
    problem = builtin(name)
    inputs = BoundInputs.from_problem(problem)
    print(f"{name}: T={inputs.horizon} L={inputs.lipschitz} "
          f"M2={inputs.f_xi_second_moment}  C={inputs.big_c:.4f}")

    print("  diagonal bound(n, n):", end="")
    for n in (1, 5, 10, 20, 30, 40):
        print(f"  {n}:{error_bound(inputs, n, n):.3g}", end="")
    print()

    print(f"  {'epsilon':>9} {'N':>4} {'tail bound':>11} {'total draws (through N)':>25}")
    for k in (1, 2, 4, 6):
        sched = n_epsilon(inputs, 2.0**-k)
        cost = sched.total_cost
        shown = f"{cost:.3e}" if cost > 10**9 else str(cost)
        print(f"  {2.0**-k:>9.4f} {sched.n_epsilon:>4} {sched.tail_bound:>11.4g} {shown:>25}")
    print()

# The draw counts of deep schedules are exact integers, not floats: the
# linear problem needs ~30 levels and its total cost has dozens of digits.
sched = n_epsilon(BoundInputs.from_problem(builtin("linear_meanfield")), 2.0**-6)
print(f"linear_meanfield at eps = 2^-6: N = {sched.n_epsilon},")
print(f"  total draws = {sched.total_cost}")
print(f"  ({len(str(sched.total_cost))} digits; rv_exact(N,N) alone "
      f"= {rv_exact(sched.n_epsilon, sched.n_epsilon):.3e} as a float)")
