"""Calibrating the collapse width against the Malus law.

Photons leaving a control beamsplitter's +1 channel are re-polarized
around its axis with spread collapse_sigma. Two polarizers in series then
transmit close to cos^2(chi); sigma = pi/9 is the width at which the
agreement is best for ideal second polarizers, and the residual envelope
quantifies how good "good agreement" is.
"""

import numpy as np

import bellsim as bs

sigma = np.pi / 9
grid = np.linspace(0, np.pi, 25)
ideal = bs.ModelParams(shaky_width=0.0)

series = bs.malus_transmission(0.0, grid, sigma, ideal, 20_000, seed=1)
print(f"{'chi':>8} {'plus frac':>10} {'cos^2 chi':>10} {'gap':>8}")
for chi, frac in zip(series.settings, series.values):
    ref = np.cos(chi) ** 2
    print(f"{chi:8.4f} {frac:10.4f} {ref:10.4f} {frac - ref:+8.4f}")

print()
print(f"ideal-polarizer deviation envelope: "
      f"{bs.malus_deviation_envelope(grid, sigma, ideal):.4f}")
print(f"with default rejection bands:       "
      f"{bs.malus_deviation_envelope(grid, sigma, bs.ModelParams()):.4f}")
for s in (np.pi / 12, np.pi / 9, np.pi / 6):
    env = bs.malus_deviation_envelope(np.linspace(0, np.pi, 241), s, ideal)
    print(f"envelope at collapse_sigma = {s:.4f}: {env:.4f}")
