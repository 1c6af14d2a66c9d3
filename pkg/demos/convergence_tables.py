"""Error tables for the pendulum at T = 0.5 (alpha-Rattle) and T = 1 (alpha-PRK III).

Errors are max-norm differences from a Lobatto IIIA-IIIB reference at a
fifty times smaller step, itself checked against a run at half that step.
"""

from alphaprk import AlphaSearchPolicy, convergence_study, get_problem

prob, s0 = get_problem("pendulum")
# search alpha* almost to round-off so the energy fix stays active on every level
policy = AlphaSearchPolicy(energy_tol=1e-14, failure="strict")

for family, T in [("alpha-rattle", 0.5), ("lobatto3-a", 1.0)]:
    rep = convergence_study(prob, family, policy, 0.25, 5, T, s0)
    print(f"\n{family} at T = {T}  (reference h = {rep.reference['h_ref']:g})")
    print(f"{'h':>9s} {'e_p':>11s} {'order':>7s} {'e_q':>11s} {'order':>7s}")
    for h, ep, op, eq, oq in rep.rows:
        o1 = "-" if op is None else f"{op:.4f}"
        o2 = "-" if oq is None else f"{oq:.4f}"
        print(f"{h:9g} {ep:11.4e} {o1:>7s} {eq:11.4e} {o2:>7s}")
