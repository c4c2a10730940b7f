"""Random linear streaming codes in stochastic erasure channels.

Closed-form long-run slot error probabilities (non-systematic codes over
hidden-Markov symbol erasure channels; systematic codes with unbounded
memory over the i.i.d. packet erasure channel), cross-validated by
Monte-Carlo simulation, exhaustive small-instance oracles, and a real
GF(2^q) codec.
"""

__version__ = "0.1.0"
