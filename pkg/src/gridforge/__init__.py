"""Multimode grid-code toolkit.

Submodules: ``symplectic`` (forms, gates, normal forms), ``lattice``
(stabilizer lattices and the code catalog), ``gauge`` (sign bookkeeping),
``code_switch`` (concatenation, split and merge), ``search`` (integral
four-dimensional families), ``classical`` (gradient-flow decoder),
``homodyne`` (ancilla-based correction Monte Carlo), ``fock`` (truncated
Fock-space engine) and ``cli``.
"""

__version__ = "0.1.0"
