"""States, marginals and the entropic quantities built on them.

Builds a few standard states, takes partial traces, and shows the
entropy bookkeeping that everything else in the package relies on:
mutual information as a relative entropy, and conditional mutual
information as a difference of mutual informations.
"""

import numpy as np

from qbroadcast import (
    bell_state,
    conditional_mutual_information,
    entropy,
    fidelity,
    ghz_state,
    mutual_information,
    random_state,
    relative_entropy,
)

rng = np.random.default_rng(1)

bell = bell_state()
print("Bell pair on two qubits")
print(f"  S(AB) = {entropy(bell):.6f} bits (pure state: 0)")
print(f"  S(A)  = {entropy(bell.marginal((0,))):.6f} bits (maximally mixed)")
print(f"  I(A:B) = {mutual_information(bell):.6f} bits")

prod = bell.marginal((0,)).tensor(bell.marginal((1,)))
print("  mutual information is the relative entropy to the product of")
print(f"  the marginals: S(rho || rhoA x rhoB) = {relative_entropy(bell, prod):.6f}")

ghz = ghz_state()
cmi = conditional_mutual_information(ghz, side_a=(0,), side_c=(2,))
via_mi = mutual_information(ghz, (0,)) - mutual_information(
    ghz.marginal((0, 1)), (0,)
)
print("\nGHZ state on three qubits")
print(f"  I(A:C|B) = {cmi:.6f} bits")
print(f"  check as I(A:BC) - I(A:B) = {via_mi:.6f} bits")

rho = random_state((2, 2), rng)
sigma = random_state((2, 2), rng)
print("\nTwo random two-qubit states")
print(f"  F(rho, sigma)   = {fidelity(rho, sigma):.6f}")
print(f"  F(rho, rho)     = {fidelity(rho, rho):.6f}")
print(f"  S(rho || sigma) = {relative_entropy(rho, sigma):.6f} bits")
