"""Three routes to the same numbers.

Every statistic has an exact quadrature mirror, the sharp-pair rejection
rate additionally has a closed geometric form, and the Monte Carlo runs
must sit within binomial noise of both. This script shows the routes
agreeing on a few configurations.
"""

import numpy as np

import bellsim as bs

params = bs.ModelParams()
src = params.pair_source()

print("quadrature vs closed-form overlap (sharp pairs)")
sharp = bs.ModelParams(misalignment_sigma=0.0)
for dphi in (0.0, 0.2, np.pi / 8, 1.3):
    quad = bs.joint_probabilities(sharp.pair_source(), 0.0, dphi, sharp).p_rejected
    closed = float(bs.sharp_pair_rejection_probability(dphi, sharp.shaky_width))
    print(f"  dphi={dphi:6.4f}  quadrature {quad:.12f}  closed form {closed:.12f}")

print()
print("Monte Carlo vs quadrature (realistic pairs, n = 100000)")
rng = np.random.default_rng(7)
for dphi in (0.0, 0.6, 2.1):
    dist = bs.joint_probabilities(src, 0.0, dphi, params)
    counts = bs.run_point(src, params.analyzer(0.0), params.analyzer(dphi),
                          params, 100_000, rng)
    print(f"  dphi={dphi:4.2f}  cell      MC freq    exact      pull")
    for name, count in (("pp", counts.n_pp), ("pm", counts.n_pm),
                        ("mp", counts.n_mp), ("mm", counts.n_mm),
                        ("rejected", counts.n_rejected)):
        p = dist.cell(name)
        sd = np.sqrt(p * (1 - p) / counts.n_total)
        pull = (count / counts.n_total - p) / sd if sd else 0.0
        print(f"{'':12}{name:9s} {count / counts.n_total:.5f}    {p:.5f}    {pull:+.2f}")

print()
print("loss-free sharp model vs the analytic saw-tooth")
fair = bs.ModelParams(shaky_width=0.0, misalignment_sigma=0.0)
for dphi in (0.3, np.pi / 8, 1.0):
    e = bs.joint_probabilities(fair.pair_source(), 0.0, dphi, fair).correlation
    print(f"  dphi={dphi:6.4f}  E = {e:+.12f}   saw-tooth {float(bs.sawtooth_correlation(dphi)):+.12f}")
