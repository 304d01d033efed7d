"""Word-level lazy Montgomery arithmetic.

Values live in the redundant range [0, 2q). With R > 8q the add/sub-multiply
butterfly maps that range onto itself, so no per-stage conditional
subtraction is needed; :func:`finalize` performs the only correction.
"""

from __future__ import annotations

from dsntt.errors import ContractError, DomainError
from dsntt.params import MontgomeryContext

RedundantResidue = int


def to_montgomery(a: int, ctx: MontgomeryContext) -> RedundantResidue:
    if not 0 <= a < ctx.q:
        raise DomainError(f"{a} is not a residue mod {ctx.q}")
    return (a << ctx.r_exp) % ctx.q


def redc(p: int, ctx: MontgomeryContext, checked: bool = True) -> RedundantResidue:
    """(p + q*[p*(-q^-1)]_R) / R.

    Requires 0 <= p < q*R, which bounds the result below 2q. ``checked=False``
    skips the guard; only the radix-margin experiments use it.
    """
    if checked and not 0 <= p < ctx.q << ctx.r_exp:
        raise ContractError(f"redc input {p} outside [0, qR)")
    m = ((p & ctx.r_mask) * ctx.neg_q_inv) & ctx.r_mask
    return (p + ctx.q * m) >> ctx.r_exp


def _check_redundant(ctx: MontgomeryContext, *xs: int) -> None:
    for x in xs:
        if not 0 <= x < ctx.two_q:
            raise DomainError(f"{x} outside redundant range [0, {ctx.two_q})")


def mont_mul_lazy(a: RedundantResidue, b: RedundantResidue, ctx: MontgomeryContext) -> RedundantResidue:
    _check_redundant(ctx, a, b)
    return redc(a * b, ctx)


def butterfly_lazy(a_i, a_j, w_add, w_sub, ctx: MontgomeryContext, checked: bool = True):
    """Add-multiply and (sub + 2q)-multiply branches, each through one REDC."""
    if checked:
        _check_redundant(ctx, a_i, a_j, w_add, w_sub)
    t_add = redc((a_i + a_j) * w_add, ctx, checked)
    t_sub = redc((a_i - a_j + ctx.two_q) * w_sub, ctx, checked)
    return t_add, t_sub


def finalize(a: RedundantResidue, ctx: MontgomeryContext) -> int:
    """Leave the Montgomery domain and apply the single deferred correction."""
    _check_redundant(ctx, a)
    r = redc(a, ctx)
    if r >= ctx.q:
        r -= ctx.q
    return r


def butterfly_cube_scan(ctx: MontgomeryContext) -> dict:
    """Evaluate the lazy butterfly on every (a_i, a_j, w) in [0, 2q)^3.

    Vectorised with int64; needs 2qR < 2^63 and R^2 < 2^63. Returns violation counts for
    the range bound and for congruence with plain modular arithmetic.
    """
    import numpy as np

    q, r = ctx.q, ctx.r_exp
    if (2 * q) << r >= 1 << 63 or 2 * r >= 63:
        raise DomainError("context too wide for the int64 scan")
    mask = np.int64(ctx.r_mask)
    nqi = np.int64(ctx.neg_q_inv)
    vals = np.arange(2 * q, dtype=np.int64)
    ai = vals[:, None, None]
    aj = vals[None, :, None]
    w = vals[None, None, :]

    def _redc(p):
        m = ((p & mask) * nqi) & mask
        return (p + q * m) >> r

    t_add = _redc((ai + aj) * w)
    t_sub = _redc((ai - aj + 2 * q) * w)
    r_inv = pow(ctx.R, -1, q)
    want_add = ((ai + aj) * w % q) * r_inv % q
    want_sub = ((ai - aj) % q * w % q) * r_inv % q
    return {
        "cases": int(t_add.size),
        "range_violations": int((t_add >= 2 * q).sum() + (t_sub >= 2 * q).sum()),
        "congruence_failures": int((t_add % q != want_add).sum() + (t_sub % q != want_sub).sum()),
        "max_output": int(max(t_add.max(), t_sub.max())),
    }
