"""eulab: shear steady Euler flows on S³ and T³, their vorticity twist maps,
resonant perturbations with knotted invariant tori, and integrability
spectrum estimates.

Submodules: :mod:`geometry`, :mod:`steady`, :mod:`dynamics`,
:mod:`twistmaps`, :mod:`kam`, :mod:`suspension` and the :mod:`cli` driver.
"""
__version__ = "0.1.0"
