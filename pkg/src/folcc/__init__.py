"""Characteristic classes of codimension-one foliations, computed.

Modules: ``expr`` (expressions and Taylor-mode evaluation), ``jets`` (jets,
composition, prolongation), ``gf`` (formal vector field cohomology),
``frames`` (canonical forms, Gysin map), ``connections`` (affine and
projective cocycles), ``diffeo`` (local diffeomorphisms and presentations),
``dynamics`` (rotation numbers, fixed points, Reeb probe), ``szekeres``
(field recursion and flows), ``scenarios`` and ``cli``.
"""

__version__ = "0.1.0"
