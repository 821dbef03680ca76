"""Exact arithmetic for graded Legendrian skein algebras, the Hall algebras of
the associated module categories over finite fields, and the comparison map
between them, at desk scale.

Subpackages/modules:

- ``ring``: the coefficient ring Z[q^{+-1}, (q-1)^{-1}] in canonical form.
- ``gfp``: prime field linear algebra and invariant factors.
- ``diagram``: front words, Lagrangian resolutions, faces, feasibility.
- ``ainf``: polygon counting, curved structure maps, Maurer-Cartan solutions.
- ``skein``: relation rewriting, normal forms, ruling polynomials.
- ``hall``: Hall products for type-A quivers and Laurent modules.
- ``phi``: the skein-to-Hall map, its disk inverse, verification harness.
- ``cli``: command line entry points.
"""

__version__ = "0.1.0"
