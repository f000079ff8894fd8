"""Closed-form right-hand sides of the integral identities, with machine-
checkable left-hand sides.

Eight identities are registered:

    L23_1   cone Laplace transform of a plain minor power
    L23_2   inverse transform / kernel form of L23_1
    COR1_1  cone Laplace transform of a shifted minor power
    COR1_2  inverse transform of COR1_1 (no trailing next-to-top minor factor)
    L24     cone integral of a shifted power against a shifted-power translate
    L25     horizontal-slice integral of a kernel modulus
    L26     tube integral of a product of two kernels against a power weight
    L27     tube integral of a kernel modulus against a power weight

Each identity is split into a constant and a constant-free *structure*
(the product of powers the closed form predicts); closed = constant x
structure.  The structure carries the scientifically forced content (the
homogeneity exponents) and is what the lambda-scaling oracle checks; the
stated composite constants are kept as given and may be overridden by an
oracle-calibrated value where the composition is wrong.  Each registered identity also knows how to build its own
left-hand-side integrand and a matched importance-sampling law, so the
numeric oracle can audit it without identity-specific code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import constants as C
from .errors import ConvergenceDomainError, InvalidInputError
from .geometry import (ConePoint, TubePoint, complex_minors,
                       complex_power_from_minors, delta_transform_parts,
                       minor_exponents, order_from_dim, require_cone,
                       schur_complement)
from .indices import (Convention, MultiIndex, bold_values, plain_values,
                      require_convention)
from .sampling import (BorderLaw, CauchyLaw, ConditionalCauchyLaw,
                       RadialLaw, SamplerSpec, VCauchyLaw)

IDENTITY_IDS = ("L23_1", "L23_2", "COR1_1", "COR1_2", "L24", "L25", "L26", "L27")

FOUR_PI = 4.0 * math.pi
TWO_PI = 2.0 * math.pi


def _cone_vec(point) -> np.ndarray:
    return require_cone(point)


def _tube(point) -> TubePoint:
    if isinstance(point, TubePoint):
        return point
    raise InvalidInputError("expected a TubePoint")


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def _log_unchecked_power(coords: np.ndarray, entries: np.ndarray,
                         d: np.ndarray | None = None) -> np.ndarray:
    """log of the minor power for batch cone coords known to be interior.

    Pass the exact Schur coordinate ``d`` when available; recomputing it
    from assembled coordinates cancels catastrophically at large borders.
    """
    n = order_from_dim(coords.shape[-1])
    if d is None:
        d = schur_complement(coords)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = entries[-1] * np.log(d) if entries[-1] != 0.0 \
            else np.zeros(np.shape(d))
        if n > 1:
            out = out + np.sum(entries[: n - 1] * np.log(coords[..., : n - 1]),
                               axis=-1)
    return out


def _abs_complex_power(zeta: np.ndarray, entries: np.ndarray) -> np.ndarray:
    """|minor power| at z/i coordinates; moduli only, branch-free."""
    mins = complex_minors(zeta)
    e = minor_exponents(entries)
    return np.exp(np.sum(e * np.log(np.abs(mins)), axis=-1))


def _complex_power(zeta: np.ndarray, entries: np.ndarray) -> np.ndarray:
    return complex_power_from_minors(complex_minors(zeta), minor_exponents(entries))


# ---------------------------------------------------------------------------
# structures (constant-free closed-form factors)
# ---------------------------------------------------------------------------

def _structure_laplace(n, s, t, border_exp_offset):
    q, tn = delta_transform_parts(np.asarray(t, dtype=float))
    logval = (-s[-1] - (n + 1.0) / 2.0) * np.log(tn)
    if n > 1:
        logval = logval + np.sum((-s[: n - 1] - border_exp_offset) * np.log(q), axis=-1)
    return np.exp(logval)


def _structure_kernel(n, s, z: TubePoint, with_next_to_top: bool,
                      shifted: bool = False):
    ent = bold_values(s, n) if shifted else np.asarray(s, dtype=float)
    e = minor_exponents(-ent)
    e[-1] += -(n + 1.0)
    if with_next_to_top and n >= 2:
        e[n - 2] += n - 2.0
    return complex_power_from_minors(complex_minors(z.zeta), e)


def _structure_L24(n, r, eta, b):
    # mixed-convention exponent: plain eta minus shifted r, then the
    # (n+1)/2 global power
    expo = eta - bold_values(r, n)
    expo = expo + (n + 1.0) / 2.0
    bb = np.asarray(b, dtype=float)
    return float(np.exp(_log_unchecked_power(bb, expo)))


def _structure_L25(n, r, v):
    expo = -bold_values(r, n) + (n + 1.0) / 2.0
    return float(np.exp(_log_unchecked_power(np.asarray(v, dtype=float), expo)))


def _zeta_diff(z: TubePoint, xi: TubePoint) -> np.ndarray:
    """Coordinates of (z - conj(xi)) / i = (y_z + y_xi) - i (x_z - x_xi)."""
    return (z.y + xi.y) - 1j * (z.x - xi.x)


def _structure_L26(n, l, r, eta, z: TubePoint, xi: TubePoint):
    expo = bold_values(l, n) - bold_values(r, n) - bold_values(eta, n)
    e = minor_exponents(expo)
    e[-1] += n + 1.0  # positive trailing exponent; the oracle adjudicates it
    return complex_power_from_minors(complex_minors(_zeta_diff(z, xi)), e)


def _structure_L27(n, l, r, z: TubePoint):
    expo = (l - r) + (n + 1.0)
    return float(np.exp(_log_unchecked_power(z.y, expo)))


# ---------------------------------------------------------------------------
# integrands and sampler presets
# ---------------------------------------------------------------------------

def _clip(x, lo):
    return float(max(x, lo))


def _cone_laplace_preset(n, t, shapes, c):
    """Gamma/Gaussian law exactly matched to exp(-c y.t) on the cone."""
    t = np.asarray(t, dtype=float)
    q, tn = delta_transform_parts(t)
    u = t[n:][::-1] if n > 1 else np.empty(0)
    radial = [RadialLaw("gamma", _clip(shapes[j], 0.35), float(c / 4.0 * q[j]))
              for j in range(n - 1)]
    radial.append(RadialLaw("gamma", _clip(shapes[n - 1], 0.35), float(c * tn)))
    border = [BorderLaw("gaussian", mu1=float(-u[j] / (2.0 * tn)),
                        s1=float(math.sqrt(1.0 / (2.0 * c * tn))))
              for j in range(n - 1)]
    return SamplerSpec(n=n, radial=tuple(radial), border=tuple(border),
                       weight_point=tuple(float(v) for v in t))


def _tube_real_laws(n, centers, diag_scales, pad=0.3):
    """Real-part laws from n diagonal length scales.

    Diagonals get static Cauchy laws; each border coordinate gets a law
    conditioned on its diagonal partner, because the kernel moduli decay
    only linearly along directions where a border tracks a large diagonal.
    """
    laws = []
    for j in range(n):
        laws.append(CauchyLaw(float(centers[j]), float(diag_scales[j] + pad)))
    for k in range(n + 1, 2 * n):  # coordinate x_k pairs diagonal j = 2n - k
        j = 2 * n - k
        s1 = math.sqrt(diag_scales[n - 1]) + pad
        laws.append(ConditionalCauchyLaw(ref=j - 1,
                                         c=float(diag_scales[j - 1]),
                                         s0=pad, s1=float(s1)))
    return tuple(laws)


def _betaprime_radial(n, zero_exp, tail_exp, scales):
    """Beta-prime laws matched to y^zero_exp near 0 and y^-(tail_exp) at infinity.

    The proposal tail is deliberately fattened by 1.25 so the importance
    ratio stays square-integrable when the integrand sits at its stated
    convergence margin.
    """
    laws = []
    for j in range(n):
        a = _clip(zero_exp[j] + 1.0, 0.4)
        b = _clip(tail_exp[j] - 1.25, 0.5)
        laws.append(RadialLaw("betaprime", a, b, _clip(scales[j], 1e-6)))
    return laws


@dataclass(frozen=True)
class IdentityDef:
    """One registered identity: parameter contract, closed form, LHS, law."""

    id: str
    label: str
    domain: str                  # "cone" | "slice" | "tube"
    param_names: tuple
    complex_valued: bool
    range_check: callable        # (n, params) -> list of (ok, message)
    structure: callable          # (n, params, point) -> value
    stated_constant: callable     # (n, params) -> float
    integrand: callable          # (n, params, point) -> batch callable
    sampler: callable            # (n, params, point) -> SamplerSpec
    scale_point: callable        # (point, lam) -> point
    reference_point: callable    # (n) -> point
    min_n: int = 1


def _params_arrays(n, params):
    return {k: plain_values(v, n) for k, v in params.items()}


def unit_cone_vector(n: int) -> np.ndarray:
    e = np.zeros(2 * n - 1)
    e[:n] = 1.0
    return e


def unit_tube_point(n: int) -> TubePoint:
    return TubePoint.make(np.zeros(2 * n - 1), unit_cone_vector(n))


def _scale_cone(point, lam):
    return np.asarray(point, dtype=float) * lam


def _scale_tube(point: TubePoint, lam) -> TubePoint:
    return TubePoint.make(point.x * lam, point.y * lam)


# -- L23_1 / COR1_1 ---------------------------------------------------------

def _laplace_integrand(n, s, t, shifted):
    t = np.asarray(t, dtype=float)
    ent = bold_values(s, n) if shifted else s

    def f(ycoords, d=None):
        return np.exp(-FOUR_PI * _dot(ycoords, t)
                      + _log_unchecked_power(ycoords, ent, d))
    return f


def _mk_L23_1():
    return IdentityDef(
        id="L23_1", label="cone Laplace transform, plain power", domain="cone",
        param_names=("s",), complex_valued=False,
        range_check=lambda n, p: C.c1_range(n, p["s"]),
        structure=lambda n, p, pt: _structure_laplace(n, p["s"], pt, 1.5),
        stated_constant=lambda n, p: C.c1(n, p["s"]),
        integrand=lambda n, p, pt: _laplace_integrand(n, p["s"], pt, False),
        sampler=lambda n, p, pt: _cone_laplace_preset(
            n, pt, np.concatenate([p["s"][:-1] + 1.5, p["s"][-1:] + 1.0]), FOUR_PI),
        scale_point=_scale_cone,
        reference_point=unit_cone_vector,
    )


def _mk_COR1_1():
    return IdentityDef(
        id="COR1_1", label="cone Laplace transform, shifted power", domain="cone",
        param_names=("s",), complex_valued=False,
        range_check=lambda n, p: C.c3_range(n, p["s"]),
        structure=lambda n, p, pt: _structure_laplace(n, p["s"], pt, (n + 1.0) / 2.0),
        stated_constant=lambda n, p: C.c3(n, p["s"]),
        integrand=lambda n, p, pt: _laplace_integrand(n, p["s"], pt, True),
        sampler=lambda n, p, pt: _cone_laplace_preset(
            n, pt,
            np.concatenate([p["s"][:-1] + (n + 1.0) / 2.0, p["s"][-1:] + 1.0]),
            FOUR_PI),
        scale_point=_scale_cone,
        reference_point=unit_cone_vector,
    )


# -- L23_2 / COR1_2 ---------------------------------------------------------

def _kernel_integrand(n, s, z: TubePoint, shifted, region: str = "cone"):
    """Inverse-transform integrand over t, as a cone-domain batch callable.

    region = "cone" integrates over the cone itself (the literal claim);
    region = "dual" integrates over the dual cone under the coordinate
    pairing, which is where the forward transform is actually finite.  The
    dual cone is the image of the cone under doubling the border
    coordinates, so it is reached from cone samples by that substitution
    (Jacobian 2^(n-1)); at n = 1 the two regions coincide.
    """
    border_exp = (s[: n - 1] + ((n + 1.0) / 2.0 if shifted else 1.5))
    top_exp = s[-1] + (n + 1.0) / 2.0
    inv_const = 1.0 / (C.c3(n, s) if shifted else C.c1(n, s))
    if region not in ("cone", "dual"):
        raise InvalidInputError(f"unknown kernel region {region!r}")
    dual = region == "dual"
    jac = 2.0 ** (n - 1) if dual else 1.0
    x, y = z.x, z.y

    def f(tcoords, d=None):
        t = tcoords
        if dual:
            t = tcoords.copy()
            t[..., n:] *= 2.0
        q, tn = delta_transform_parts(t)
        logmag = top_exp * np.log(tn) - TWO_PI * _dot(t, y)
        if n > 1:
            logmag = logmag + np.sum(border_exp * np.log(q), axis=-1)
        phase = TWO_PI * _dot(t, x)
        return jac * inv_const * np.exp(logmag) * np.exp(1j * phase)
    return f


def _kernel_sampler(n, s, z: TubePoint, shifted):
    shapes = np.concatenate([s[: n - 1] + (2.5 if not shifted else (n + 3.0) / 2.0),
                             s[-1:] + (n + 3.0) / 2.0])
    return _cone_laplace_preset(n, z.y, shapes, TWO_PI)


def _mk_L23_2():
    return IdentityDef(
        id="L23_2", label="inverse transform kernel, plain power", domain="cone",
        param_names=("s",), complex_valued=True,
        range_check=lambda n, p: C.c2_range(n, p["s"]),
        structure=lambda n, p, pt: _structure_kernel(n, p["s"], pt, True),
        stated_constant=lambda n, p: C.c2(n, p["s"]),
        integrand=lambda n, p, pt: _kernel_integrand(n, p["s"], pt, False),
        sampler=lambda n, p, pt: _kernel_sampler(n, p["s"], pt, False),
        scale_point=_scale_tube,
        reference_point=unit_tube_point,
    )


def _mk_COR1_2():
    return IdentityDef(
        id="COR1_2", label="inverse transform kernel, shifted power", domain="cone",
        param_names=("s",), complex_valued=True,
        range_check=lambda n, p: C.c4_range(n, p["s"]),
        structure=lambda n, p, pt: _structure_kernel(n, p["s"], pt, False,
                                                     shifted=True),
        stated_constant=lambda n, p: C.c4(n, p["s"]),
        integrand=lambda n, p, pt: _kernel_integrand(n, p["s"], pt, True),
        sampler=lambda n, p, pt: _kernel_sampler(n, p["s"], pt, True),
        scale_point=_scale_tube,
        reference_point=unit_tube_point,
    )


# -- L24 --------------------------------------------------------------------

def _L24_integrand(n, r, eta, b):
    b = np.asarray(b, dtype=float)
    rb, eb = bold_values(r, n), bold_values(eta, n)

    def f(ycoords, d=None):
        return np.exp(_log_unchecked_power(ycoords + b, -rb)
                      + _log_unchecked_power(ycoords, eb, d))
    return f


def _L24_sampler(n, r, eta, b):
    b = np.asarray(b, dtype=float)
    eb = bold_values(eta, n)
    d_b = float(schur_complement(b))
    zero_exp = np.concatenate([eb[:-1], eb[-1:]])
    tail_exp = np.concatenate([(r - eta)[:-1], (r - eta)[-1:]])
    scales = np.concatenate([b[: n - 1], [d_b]])
    radial = _betaprime_radial(n, zero_exp, tail_exp, scales)
    u_b = b[n:][::-1] if n > 1 else np.empty(0)
    border = [BorderLaw("cauchy", mu0=float(-u_b[j]),
                        s0=0.3, s1=float(math.sqrt((d_b + 0.5) * (1.0 + b[j]) / b[j])))
              for j in range(n - 1)]
    return SamplerSpec(n=n, radial=tuple(radial), border=tuple(border),
                       weight_point=tuple(float(v) for v in b))


def _mk_L24():
    return IdentityDef(
        id="L24", label="shifted power against translate", domain="cone",
        param_names=("r", "eta"), complex_valued=False,
        range_check=lambda n, p: C.c5_range(n, p["r"], p["eta"]),
        structure=lambda n, p, pt: _structure_L24(n, p["r"], p["eta"], pt),
        stated_constant=lambda n, p: C.c5(n, p["r"], p["eta"]),
        integrand=lambda n, p, pt: _L24_integrand(n, p["r"], p["eta"], pt),
        sampler=lambda n, p, pt: _L24_sampler(n, p["r"], p["eta"], pt),
        scale_point=_scale_cone,
        reference_point=unit_cone_vector,
    )


# -- L25 --------------------------------------------------------------------

def _L25_integrand(n, r, v):
    v = np.asarray(v, dtype=float)
    rb = bold_values(r, n)

    def f(u):
        return _abs_complex_power(v - 1j * u, -rb)
    return f


def _L25_sampler(n, r, v):
    v = np.asarray(v, dtype=float)
    diag = v[:n].copy()
    diag[n - 1] = max(float(schur_complement(v)), diag[n - 1] * 0.5)
    radial = [RadialLaw("gamma", 1.0, 1.0)] * n          # unused placeholders
    border = [BorderLaw("gaussian")] * (n - 1)
    real = _tube_real_laws(n, np.zeros(2 * n - 1), diag)
    return SamplerSpec(n=n, radial=tuple(radial), border=tuple(border), real=real,
                       weight_point=tuple(float(x) for x in v))


def _mk_L25():
    return IdentityDef(
        id="L25", label="horizontal slice of kernel modulus", domain="slice",
        param_names=("r",), complex_valued=False,
        range_check=lambda n, p: C.c6_range(n, p["r"]),
        structure=lambda n, p, pt: _structure_L25(n, p["r"], pt),
        stated_constant=lambda n, p: C.c6(n, p["r"]),
        integrand=lambda n, p, pt: _L25_integrand(n, p["r"], pt),
        sampler=lambda n, p, pt: _L25_sampler(n, p["r"], pt),
        scale_point=_scale_cone,
        reference_point=unit_cone_vector,
    )


# -- L26 --------------------------------------------------------------------

def _L26_integrand(n, l, r, eta, point):
    z, xi = point
    lb, rb, eb = bold_values(l, n), bold_values(r, n), bold_values(eta, n)
    er, ee = minor_exponents(-rb), minor_exponents(-eb)
    xz, yz, xxi, yxi = z.x, z.y, xi.x, xi.y

    def f(u, v):
        zeta1 = (yz + v) - 1j * (xz - u)     # (z - conj(w))/i
        zeta2 = (v + yxi) - 1j * (u - xxi)   # (w - conj(xi))/i
        kern = (complex_power_from_minors(complex_minors(zeta1), er)
                * complex_power_from_minors(complex_minors(zeta2), ee))
        return np.exp(_log_unchecked_power(v, lb)) * kern
    return f


def _tube_v_real_laws(n, centers, offsets, pad=0.3):
    """Real-part laws whose scales track the sampled imaginary part."""
    laws = []
    for j in range(n):
        laws.append(VCauchyLaw(ref1=j, ref2=None,
                               offset=float(offsets[j] + pad)))
    for k in range(n + 1, 2 * n):  # coordinate x_k pairs diagonal j = 2n - k
        j = 2 * n - k
        off = math.sqrt(offsets[j - 1] * offsets[n - 1]) + pad
        laws.append(VCauchyLaw(ref1=j - 1, ref2=n - 1, offset=float(off)))
    centers = np.asarray(centers, dtype=float)
    if np.any(centers != 0.0):
        # recenter by shifting after sampling is not supported; fold the
        # center into the offset so the scale still covers it
        laws = [VCauchyLaw(law.ref1, law.ref2,
                           law.offset + abs(float(centers[i])), law.coef)
                for i, law in enumerate(laws)]
    return tuple(laws)


def _tube_weight_sampler(n, l_like, tail, centers, diag_scales):
    """Beta-prime cone part + v-scaled Cauchy real part for tube integrands."""
    radial = _betaprime_radial(n, l_like, tail, diag_scales)
    border = [BorderLaw("cauchy", s0=0.3,
                        s1=float(math.sqrt(max(diag_scales[n - 1], 0.3))))
              for _ in range(n - 1)]
    real = _tube_v_real_laws(n, centers, diag_scales)
    return SamplerSpec(n=n, radial=tuple(radial), border=tuple(border), real=real)


def _L26_sampler(n, l, r, eta, point):
    z, xi = point
    lb = bold_values(l, n)
    tail = np.concatenate([(r + eta - l)[:-1] - (n + 1.0) / 2.0,
                           (r + eta - l)[-1:] - (n + 1.0) / 2.0])
    diag = 0.5 * (z.y[:n] + xi.y[:n])
    centers_diag = 0.5 * (z.x + xi.x)
    return _tube_weight_sampler(n, lb, tail, centers_diag, diag)


def _mk_L26():
    return IdentityDef(
        id="L26", label="tube kernel product", domain="tube",
        param_names=("l", "r", "eta"), complex_valued=True,
        range_check=lambda n, p: C.c7_range(n, p["l"], p["r"], p["eta"]),
        structure=lambda n, p, pt: _structure_L26(n, p["l"], p["r"], p["eta"], *pt),
        stated_constant=lambda n, p: C.c7(n, p["l"], p["r"], p["eta"]),
        integrand=lambda n, p, pt: _L26_integrand(n, p["l"], p["r"], p["eta"], pt),
        sampler=lambda n, p, pt: _L26_sampler(n, p["l"], p["r"], p["eta"], pt),
        scale_point=lambda pt, lam: (_scale_tube(pt[0], lam), _scale_tube(pt[1], lam)),
        reference_point=lambda n: (unit_tube_point(n), unit_tube_point(n)),
    )


# -- L27 --------------------------------------------------------------------

def _L27_integrand(n, l, r, z: TubePoint):
    lb, rb = bold_values(l, n), bold_values(r, n)
    xz, yz = z.x, z.y

    def f(u, v):
        zeta = (yz + v) - 1j * (xz - u)
        return np.exp(_log_unchecked_power(v, lb)) * _abs_complex_power(zeta, -rb)
    return f


def _L27_sampler(n, l, r, z: TubePoint):
    lb = bold_values(l, n)
    tail = (r - l) - (n + 1.0) / 2.0
    return _tube_weight_sampler(n, lb, tail, z.x, z.y[:n])


def _mk_L27():
    return IdentityDef(
        id="L27", label="tube kernel modulus", domain="tube",
        param_names=("l", "r"), complex_valued=False,
        range_check=lambda n, p: C.c8_range(n, p["l"], p["r"]),
        structure=lambda n, p, pt: _structure_L27(n, p["l"], p["r"], pt),
        stated_constant=lambda n, p: C.c8(n, p["l"], p["r"]),
        integrand=lambda n, p, pt: _L27_integrand(n, p["l"], p["r"], pt),
        sampler=lambda n, p, pt: _L27_sampler(n, p["l"], p["r"], pt),
        scale_point=_scale_tube,
        reference_point=unit_tube_point,
    )


IDENTITIES = {d.id: d for d in (
    _mk_L23_1(), _mk_L23_2(), _mk_COR1_1(), _mk_COR1_2(),
    _mk_L24(), _mk_L25(), _mk_L26(), _mk_L27())}


def get_identity(identity_id: str) -> IdentityDef:
    try:
        return IDENTITIES[identity_id]
    except KeyError:
        raise InvalidInputError(
            f"unknown identity {identity_id!r}; known: {sorted(IDENTITIES)}") from None


def check_params(identity_id: str, n: int, params: dict) -> None:
    ident = get_identity(identity_id)
    p = _params_arrays(n, params)
    bad = [msg for ok, msg in ident.range_check(n, p) if not ok]
    if bad:
        raise ConvergenceDomainError(bad)


def kernel_region_integrand(identity_id: str, n: int, params: dict, point,
                            region: str):
    """Region-selectable LHS integrand for the two kernel identities."""
    if identity_id not in ("L23_2", "COR1_2"):
        raise InvalidInputError("region selection only applies to the kernel "
                                "identities")
    p = _params_arrays(n, params)
    return _kernel_integrand(n, p["s"], point, identity_id == "COR1_2", region)


def closed_value(identity_id: str, n: int, params: dict, point,
                 constant: float | None = None):
    """constant x structure for one identity; stated constant by default."""
    ident = get_identity(identity_id)
    p = _params_arrays(n, params)
    bad = [msg for ok, msg in ident.range_check(n, p) if not ok]
    if bad:
        raise ConvergenceDomainError(bad)
    cst = ident.stated_constant(n, p) if constant is None else constant
    return cst * ident.structure(n, p, point)


def structure_value(identity_id: str, n: int, params: dict, point):
    ident = get_identity(identity_id)
    return ident.structure(n, _params_arrays(n, params), point)


# ---------------------------------------------------------------------------
# public closed-form operations
# ---------------------------------------------------------------------------

def _point_vec(x) -> np.ndarray:
    if isinstance(x, ConePoint):
        return x.values
    return np.asarray(x, dtype=float)


def _plain_index(s, name: str) -> np.ndarray:
    if isinstance(s, MultiIndex):
        require_convention(s, Convention.PLAIN, name)
        return s.values
    return np.atleast_1d(np.asarray(s, dtype=float))


def _shifted_index(s, n: int, name: str) -> np.ndarray:
    """Plain values of an index declared shifted (bare arrays read as shifted)."""
    if isinstance(s, MultiIndex):
        require_convention(s, Convention.SHIFTED, name)
        return plain_values(s, n)
    vals = np.atleast_1d(np.asarray(s, dtype=float)).copy()
    vals[: len(vals) - 1] -= (len(vals) - 2) / 2.0
    return vals


def laplace_power_closed(t, s, constant: float | None = None) -> float:
    """Closed form of the cone Laplace transform of a plain minor power."""
    tv = _cone_vec(_point_vec(t))
    n = order_from_dim(tv.shape[-1])
    return float(closed_value("L23_1", n, {"s": _plain_index(s, "s")}, tv,
                              constant))


def kernel_closed(z: TubePoint, s, constant: float | None = None) -> complex:
    """Closed form of the inverse-transform kernel for a plain index."""
    z = _tube(z)
    return complex(closed_value("L23_2", z.n, {"s": _plain_index(s, "s")}, z,
                                constant))


def cor1_laplace_closed(t, s, constant: float | None = None) -> float:
    """Shifted-power Laplace closed form; takes the plain s and shifts inside."""
    tv = _cone_vec(_point_vec(t))
    n = order_from_dim(tv.shape[-1])
    return float(closed_value("COR1_1", n, {"s": _plain_index(s, "s")}, tv,
                              constant))


def cor1_kernel_closed(z: TubePoint, s, constant: float | None = None) -> complex:
    z = _tube(z)
    return complex(closed_value("COR1_2", z.n, {"s": _plain_index(s, "s")}, z,
                                constant))


def cone_shift_closed(b, r, eta, constant: float | None = None) -> float:
    """Closed form of the cone integral of a power against a translate."""
    bv = _cone_vec(_point_vec(b))
    n = order_from_dim(bv.shape[-1])
    params = {"r": _shifted_index(r, n, "r"), "eta": _shifted_index(eta, n, "eta")}
    return float(closed_value("L24", n, params, bv, constant))


def horizontal_abs_closed(v, r, constant: float | None = None) -> float:
    """Closed form of the horizontal-slice integral of a kernel modulus."""
    vv = _cone_vec(_point_vec(v))
    n = order_from_dim(vv.shape[-1])
    return float(closed_value("L25", n, {"r": _shifted_index(r, n, "r")}, vv,
                              constant))


def tube_product_closed(z: TubePoint, xi: TubePoint, l, r, eta,
                        constant: float | None = None) -> complex:
    """Closed form of the two-kernel tube integral (trailing factor verbatim)."""
    z, xi = _tube(z), _tube(xi)
    if z.n != xi.n:
        raise InvalidInputError("z and xi must share the same order")
    n = z.n
    params = {"l": _shifted_index(l, n, "l"), "r": _shifted_index(r, n, "r"),
              "eta": _shifted_index(eta, n, "eta")}
    return complex(closed_value("L26", n, params, (z, xi), constant))


def tube_abs_closed(z: TubePoint, l, r, constant: float | None = None) -> float:
    """Closed form of the tube integral of a kernel modulus; x-independent."""
    z = _tube(z)
    n = z.n
    params = {"l": _shifted_index(l, n, "l"), "r": _shifted_index(r, n, "r")}
    return float(closed_value("L27", n, params, z, constant))


# ---------------------------------------------------------------------------
# randomized in-range configurations (drives audits and oracle suites)
# ---------------------------------------------------------------------------

def random_cone_vector(n: int, rng: np.random.Generator,
                       lo: float = 0.6, hi: float = 1.8) -> np.ndarray:
    y = rng.uniform(lo, hi, size=n - 1)
    d = rng.uniform(lo, hi)
    u = rng.uniform(-0.4, 0.4, size=n - 1) * np.sqrt(y * d)
    from .geometry import canonical_to_coords
    return canonical_to_coords(y, u, np.asarray(d))


def random_tube_point(n: int, rng: np.random.Generator,
                      x_scale: float = 0.25) -> TubePoint:
    x = rng.uniform(-x_scale, x_scale, size=2 * n - 1)
    return TubePoint.make(x, random_cone_vector(n, rng))


def random_params(identity_id: str, n: int, rng: np.random.Generator) -> dict:
    """In-range parameters with safety margins from every range boundary.

    Margins keep the importance laws square-integrable (e.g. the last
    exponent of L24's r stays above 1.05 so the Cauchy border proposal has
    finite variance), which the dominance notes in the samplers assume.
    """
    if identity_id == "L23_1":
        s = np.concatenate([rng.uniform(-1.1, 1.5, size=n - 1),
                            rng.uniform(-0.6, 1.5, size=1)])
        return {"s": s}
    if identity_id == "COR1_1":
        s = np.concatenate([rng.uniform(-(n + 1) / 2.0 + 0.4, 1.5, size=n - 1),
                            rng.uniform(-0.6, 1.5, size=1)])
        return {"s": s}
    if identity_id == "L23_2":
        s = np.concatenate([rng.uniform(-1.1, 1.2, size=n - 1),
                            rng.uniform(-0.6, 1.2, size=1)])
        return {"s": s}
    if identity_id == "COR1_2":
        s = np.concatenate([rng.uniform(-(n + 1) / 2.0 + 0.4, 1.2, size=n - 1),
                            rng.uniform(-0.6, 1.2, size=1)])
        return {"s": s}
    if identity_id == "L24":
        eta = np.concatenate([rng.uniform(-(n + 1) / 2.0 + 0.4, 1.0, size=n - 1),
                              rng.uniform(-0.6, 1.0, size=1)])
        r = eta.copy()
        r[:-1] += n + rng.uniform(0.4, 1.6, size=n - 1)
        r[-1] = max(eta[-1] + (n + 1) / 2.0, 0.0, 0.75) + rng.uniform(0.4, 1.6)
        return {"r": r, "eta": eta}
    if identity_id == "L25":
        r = np.concatenate([rng.uniform(1.9, 3.5, size=n - 1),
                            rng.uniform((n + 1) / 2.0 + 0.5, (n + 1) / 2.0 + 2.5,
                                        size=1)])
        return {"r": r}
    if identity_id == "L26":
        l = np.concatenate([rng.uniform(-(n + 1) / 2.0 + 0.4, 0.8, size=n - 1),
                            rng.uniform(-0.6, 0.8, size=1)])
        eta = np.concatenate([rng.uniform(n + 0.4, n + 2.0, size=n - 1),
                              rng.uniform((n + 1) / 2.0 + 0.4, (n + 1) / 2.0 + 2.0,
                                          size=1)])
        r = np.concatenate([rng.uniform((n - 1) / 2.0 + 0.4, n + 2.0, size=n - 1),
                            rng.uniform(0.4, n + 2.0, size=1)])
        gap_j = (3 * n + 1) / 2.0 - (r[:-1] + eta[:-1] - l[:-1])
        r[:-1] += np.maximum(gap_j + 0.4, 0.0)
        gap_n = (n + 1.0) - (r[-1] + eta[-1] - l[-1])
        r[-1] += max(gap_n + 0.4, 0.0)
        return {"l": l, "r": r, "eta": eta}
    if identity_id == "L27":
        l = np.concatenate([rng.uniform(-(n + 1) / 2.0 + 0.4, 0.8, size=n - 1),
                            rng.uniform(-0.6, 0.8, size=1)])
        r = l.copy()
        r[:-1] += (3 * n + 1) / 2.0 + rng.uniform(0.4, 1.5, size=n - 1)
        r[-1] += n + 1 + rng.uniform(0.4, 1.5)
        return {"l": l, "r": r}
    raise InvalidInputError(f"unknown identity {identity_id!r}")


def random_point(identity_id: str, n: int, rng: np.random.Generator):
    ident = get_identity(identity_id)
    if identity_id in ("L23_2", "COR1_2"):
        return random_tube_point(n, rng, x_scale=0.15)
    if ident.domain == "cone" or ident.domain == "slice":
        return random_cone_vector(n, rng)
    if identity_id == "L26":
        return (random_tube_point(n, rng), random_tube_point(n, rng))
    return random_tube_point(n, rng)
