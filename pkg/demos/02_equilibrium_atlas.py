"""Atlas of consensus equilibria across the cross-inhibition rate.

The symmetric branch (xi = mu, no decision) always exists; the locked
branch (zeta pinned at alpha/(r d), a genuine decision for one option)
appears only when imitation is strong enough and cross-inhibition not too
weak. Sweeping sigma shows the locked branch switching on, and shows where
the row-dominance certificate vouches for the symmetric branch: only while
sigma stays under (alpha - r d zeta) / (d (1 - xi)) -- weak cross-talk
cannot destabilize an abandonment-dominated consensus.

Run:  python demos/02_equilibrium_atlas.py
"""

import numpy as np

from swarmnet import ModelParams, certify_stability, equilibrium_case1, equilibrium_case2

d = 3
gamma, r, alpha = 0.15, 0.25, 0.55

print(f"rates: gamma={gamma} r={r} alpha={alpha}, degree d={d}")
print(f"locked branch pins zeta = alpha/(r d) = {alpha / (r * d):.4f}\n")
header = f"{'sigma':>6} | {'xi=mu':>8} {'cert':>5} {'margin':>8} | locked roots (xi, mu)"
print(header)
print("-" * len(header))
for sigma in (0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2):
    params = ModelParams(gamma=gamma, r=r, alpha=alpha, sigma=sigma)
    sym = equilibrium_case1(params, d)
    cert = certify_stability(sym, params, d)
    locked = equilibrium_case2(params, d)
    locked_txt = (
        "  ".join(f"({eq.xi:.4f}, {eq.mu:.4f})" for eq in locked) if locked else "none (no real root)"
    )
    print(
        f"{sigma:6.2f} | {sym.xi:8.5f} {str(cert.holds):>5} {cert.margin:8.3f} | {locked_txt}"
    )

print(
    "\nreading the table: raising sigma shrinks the symmetric branch's"
    "\ncertificate margin through zero, and eventually real locked-branch"
    "\nroots appear -- strong cross-inhibition is what carves out a decision."
)
