"""The sign and normalization conventions the engine is built on.

The verification report embeds a hash of this text, so any change to a
convention changes every report's fingerprint.
"""

import hashlib

CONVENTIONS = """\
fiber variables: y^i (real), w^mu and wb^mu (Kahler); weight = 2*(hbar power) + fiber degree
Moyal product: exp((hbar/2) omega^{ij} d_{y^i} x d_{y^j})
Kahler form: omega = H_{ab} dz^a ^ dzb^b, G = H^{-1}
anti-Wick product: exp(hbar G[nu][mu] d_{wb^nu} x d_{w^mu})
delta a = dx^i ^ d_{y^i} a; delta^{-1} a = (1/(p+q)) y^i i(d_{x^i}) a on fiber degree p, form degree q
Fedosov equation: R + nabla gamma + (1/2hbar)[gamma, gamma] = -(omega + (hbar/i) omega_1)
gamma = -omega_tilde + A + hbar B with (1/hbar)[-omega_tilde, .] = -delta
normalization: delta^{-1} A = s, A starts in weight 3
level k: hbar = i/k
twisted line bundles: frame form +-k d'rho0 + d'rho1, curvature (1/i)(+-k omega + omega_1)
bimodule bundle: curvature (2k/i) omega
module connection: D s = nabla s +- (k/i) gamma_k (act) s + theta ^ s
"""


def fingerprint() -> str:
    return hashlib.sha256(CONVENTIONS.encode()).hexdigest()[:16]
