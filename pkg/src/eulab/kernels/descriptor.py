"""Flat kernel descriptors.

A field or annulus map is described by one read-only float64 array: a
header of ``HEADER`` slots followed by profile blocks and the perturbation
block.  A single array keeps compiled calls cheap (no tuples of arrays to
unpack and reference-count on every evaluation).

Header slots
------------
``H_ISPACE``  0 for S³, 1 for T³
``H_KIND``    0: shear flow given by two profiles; 1: winding ``W`` and density ``D``
``H_MODE``    0: velocity, 1: vorticity
``H_SEC``     index of the sectioned angle
``H_A, H_B``  offsets of the two profile blocks
``H_PERT``    offset of the perturbation block
``H_DKIND``   0: no pushforward, 1: chart shear ``(a + X(r), s + Y(r), r)``
``H_X, H_Y``  offsets of the shear profiles (zero profiles when unused)

A profile block is ``[kind, n1, rows, cols, c1..., c2 (row-major)...]``.
The perturbation block is ``[active, eps, q, phi0, c, rb, h, tc]``.
"""
import numpy as np

H_ISPACE, H_KIND, H_MODE, H_SEC, H_A, H_B, H_PERT, H_DKIND, H_X, H_Y = range(10)
HEADER = 10
PERT_LEN = 8
_ZERO_PROFILE = (0, np.zeros(1), np.zeros((0, 0)))


def pack_profile(kind, c1, c2):
    c1 = np.asarray(c1, dtype=float).ravel()
    c2 = np.atleast_2d(np.asarray(c2, dtype=float)) if np.size(c2) else np.zeros((0, 0))
    return np.concatenate([[kind, c1.size, c2.shape[0], c2.shape[1]], c1, c2.ravel()])


def build(ispace, kind, mode, sec, A, B, pert=None, X=None, Y=None):
    """Assemble a descriptor; profiles are ``(kind, c1, c2)`` triples."""
    pert = np.zeros(PERT_LEN) if pert is None else np.asarray(pert, dtype=float)
    dkind = 0 if X is None else 1
    X = _ZERO_PROFILE if X is None else X
    Y = _ZERO_PROFILE if Y is None else Y
    blocks = [pack_profile(*A), pack_profile(*B), pert, pack_profile(*X), pack_profile(*Y)]
    offs = np.cumsum([HEADER] + [b.size for b in blocks[:-1]])
    head = np.zeros(HEADER)
    head[[H_ISPACE, H_KIND, H_MODE, H_SEC, H_DKIND]] = ispace, kind, mode, sec, dkind
    head[[H_A, H_B, H_PERT, H_X, H_Y]] = offs
    d = np.concatenate([head] + blocks)
    d.setflags(write=False)
    return d


def _edit(d, fn):
    out = np.array(d)
    fn(out)
    out.setflags(write=False)
    return out


def with_pert(d, pert):
    def f(o):
        p = int(o[H_PERT])
        o[p:p + PERT_LEN] = pert
    return _edit(d, f)


def with_sec(d, sec):
    def f(o):
        o[H_SEC] = sec
    return _edit(d, f)


def without_pushforward(d):
    def f(o):
        o[H_DKIND] = 0
    return _edit(d, f)


def header(d, slot):
    return int(d[slot])


def profile(d, slot):
    """``(kind, c1, c2)`` views of the profile block whose offset sits in ``slot``."""
    off = int(d[slot])
    kind, n1, rows, cols = (int(v) for v in d[off:off + 4])
    c1 = d[off + 4:off + 4 + n1]
    c2 = d[off + 4 + n1:off + 4 + n1 + rows * cols].reshape(rows, cols)
    return kind, c1, c2


def pert(d):
    p = int(d[H_PERT])
    return d[p:p + PERT_LEN]


def same_base(d1, d2):
    """True when two descriptors share space, kind, mode, section and profiles."""
    if d1[H_ISPACE] != d2[H_ISPACE] or d1[H_KIND] != d2[H_KIND] or d1[H_MODE] != d2[H_MODE]:
        return False
    if d1[H_SEC] != d2[H_SEC]:
        return False
    for slot in (H_A, H_B):
        a, b = profile(d1, slot), profile(d2, slot)
        if a[0] != b[0] or not np.array_equal(a[1], b[1]) or not np.array_equal(a[2], b[2]):
            return False
    return True
