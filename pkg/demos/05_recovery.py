"""Recovering a lost subsystem: Petz map versus the certified optimum.

For a tripartite state ABC, a recovery channel R: B -> BC tries to
rebuild the full state from the AB marginal.  Perfect recovery is
possible exactly when I(A:C|B) = 0 (a short Markov chain), and in
general the best fidelity is at least 2^(-I(A:C|B)/2).  The Petz map
is an explicit recovery built from the BC marginal; the optimum is an
SDP over Choi matrices.
"""

import numpy as np

from qbroadcast import ghz_state, markov_chain_state, random_state, recovery_report

rng = np.random.default_rng(5)

states = [
    ("Markov chain (A,B) x C", markov_chain_state("product-right", (2, 2, 2), rng)),
    ("Markov chain, classical B", markov_chain_state("classical-b", (2, 2, 2), rng)),
    ("GHZ", ghz_state()),
    ("random three qubits", random_state((2, 2, 2), rng)),
]

for name, rho in states:
    rep = recovery_report(rho)
    print(f"{name}:")
    print(f"  I(A:C|B)            = {rep.cmi:.8f} bits")
    print(f"  Petz fidelity       = {rep.petz_fidelity:.8f}")
    print(f"  optimal fidelity    = {rep.optimal_fidelity:.8f}")
    print(f"  bound 2^(-CMI/2)    = {rep.bound:.8f}")
    print(f"  Petz rebuilds rho_BC from rho_B with residual "
          f"{rep.sigma_recovery_residual:.1e}")
    print()

print("the GHZ state saturates Petz = bound = 1/sqrt(2) = "
      f"{1 / np.sqrt(2):.8f}; zero conditional mutual information")
print("means fidelity 1, and the bound degrades gracefully in between")
