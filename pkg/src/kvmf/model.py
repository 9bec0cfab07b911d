"""Model parameters, interaction normalizations and angular Fourier densities.

Densities on the circle are stored as complex Fourier coefficients
rho(theta) = sum_n c_n exp(i n theta) with c_{-n} = conj(c_n) and
c_0 = 1/(2 pi).  All operators used by the solvers (moments, interaction
field, drift multiplication) are exact maps on these coefficients; grid
sampling is provided for quadrature cross-checks and output only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

TWO_PI = 2.0 * math.pi
UNIFORM_C0 = 1.0 / TWO_PI


class NormalizationVariant(Enum):
    """The four normalization conventions for the alignment interaction."""

    FULLY_NORMALISED = "fully_normalised"
    UNNORMALISED = "unnormalised"
    PARTIAL_THETA = "partial_theta"
    PARTIAL_X = "partial_x"


_VARIANT_ALIASES = {
    "fully_normalised": NormalizationVariant.FULLY_NORMALISED,
    "fullynormalised": NormalizationVariant.FULLY_NORMALISED,
    "unnormalised": NormalizationVariant.UNNORMALISED,
    "partial_theta": NormalizationVariant.PARTIAL_THETA,
    "partialtheta": NormalizationVariant.PARTIAL_THETA,
    "partial_x": NormalizationVariant.PARTIAL_X,
    "partialx": NormalizationVariant.PARTIAL_X,
}


def parse_variant(name):
    key = str(name).strip().lower().replace("-", "_")
    try:
        return _VARIANT_ALIASES[key]
    except KeyError:
        raise ValueError(f"unknown normalization variant: {name!r}") from None


def kernel_mass(radius, dimension):
    """Mass of the top-hat interaction window: pi R^2 in 2d, 2R in 1d."""
    if dimension == 2:
        return math.pi * radius**2
    if dimension == 1:
        return 2.0 * radius
    raise ValueError(f"dimension must be 1 or 2, got {dimension}")


def linearization_kappa(variant, radius, dimension):
    """Effective kernel constant multiplying the alignment term.

    This is the constant that enters both the homogeneous self-consistency
    map and the linearization around the uniform state: 1 for the fully
    normalised rule, the window mass for the unnormalised and
    theta-normalised rules, and 2*pi for the x-normalised rule (where the
    local-density denominator cancels the window mass and contributes a
    factor 2*pi relative to the fully normalised case).
    """
    if variant is NormalizationVariant.FULLY_NORMALISED:
        return 1.0
    if variant in (NormalizationVariant.UNNORMALISED, NormalizationVariant.PARTIAL_THETA):
        return kernel_mass(radius, dimension)
    if variant is NormalizationVariant.PARTIAL_X:
        return TWO_PI
    raise ValueError(f"unknown variant {variant!r}")


@dataclass(frozen=True)
class ModelParams:
    """Physical and model constants shared by all solvers.

    kappa0 defaults to the variant's linearization kernel constant for the
    chosen dimension; pass it explicitly to override.
    """

    gamma_noise: float
    coupling: float
    tilt: float = 0.0
    field: float = 0.0
    speed: float = 0.0
    radius: float = 0.25
    variant: NormalizationVariant = NormalizationVariant.FULLY_NORMALISED
    potential: tuple = (1.0,)
    dimension: int = 2
    kappa0: float = None

    def __post_init__(self):
        if self.gamma_noise <= 0:
            raise ValueError("gamma_noise must be positive")
        if self.coupling <= 0:
            raise ValueError("coupling must be positive")
        if self.tilt < 0 or self.field < 0 or self.speed < 0:
            raise ValueError("tilt, field and speed must be nonnegative")
        if not (0.0 < self.radius <= 0.5):
            raise ValueError("radius must lie in (0, 0.5]")
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if isinstance(self.variant, str):
            object.__setattr__(self, "variant", parse_variant(self.variant))
        pot = tuple(float(a) for a in self.potential)
        if len(pot) == 0 or any(a <= 0 for a in pot):
            raise ValueError("potential coefficients must be strictly positive")
        object.__setattr__(self, "potential", pot)
        if self.kappa0 is None:
            object.__setattr__(
                self,
                "kappa0",
                linearization_kappa(self.variant, self.radius, self.dimension),
            )
        if self.kappa0 <= 0:
            raise ValueError("kappa0 must be positive")

    @property
    def degree(self):
        return len(self.potential)

    def replace(self, **kwargs):
        fields = dict(
            gamma_noise=self.gamma_noise,
            coupling=self.coupling,
            tilt=self.tilt,
            field=self.field,
            speed=self.speed,
            radius=self.radius,
            variant=self.variant,
            potential=self.potential,
            dimension=self.dimension,
            kappa0=None if ("variant" in kwargs or "radius" in kwargs or
                            "dimension" in kwargs) else self.kappa0,
        )
        fields.update(kwargs)
        return ModelParams(**fields)


def params_to_config(params):
    """Serialize ModelParams to the flat `key = value` text format."""
    lines = [
        f"gamma_noise = {params.gamma_noise!r}",
        f"coupling = {params.coupling!r}",
        f"tilt = {params.tilt!r}",
        f"field = {params.field!r}",
        f"speed = {params.speed!r}",
        f"radius = {params.radius!r}",
        f"variant = {params.variant.value}",
        "potential = [" + ", ".join(repr(a) for a in params.potential) + "]",
        f"dimension = {params.dimension}",
        f"kappa0 = {params.kappa0!r}",
    ]
    return "\n".join(lines) + "\n"


def params_from_config(text):
    """Parse the flat `key = value` config format produced by params_to_config."""
    values = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        values[key] = val
    kwargs = {}
    for key in ("gamma_noise", "coupling", "tilt", "field", "speed", "radius", "kappa0"):
        if key in values:
            kwargs[key] = float(values[key])
    if "dimension" in values:
        kwargs["dimension"] = int(values["dimension"])
    if "variant" in values:
        kwargs["variant"] = parse_variant(values["variant"])
    if "potential" in values:
        inner = values["potential"].strip().lstrip("[").rstrip("]")
        kwargs["potential"] = tuple(float(a) for a in inner.split(",") if a.strip())
    return ModelParams(**kwargs)


class AngularDensity:
    """2*pi-periodic probability density stored as complex Fourier coefficients."""

    __slots__ = ("max_mode", "coeffs")

    def __init__(self, max_mode, coeffs, validate=True):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (2 * max_mode + 1,):
            raise ValueError("coeffs must have length 2*max_mode + 1")
        if validate:
            if abs(coeffs[max_mode] - UNIFORM_C0) > 1e-9:
                raise ValueError("c_0 must equal 1/(2 pi)")
            if np.max(np.abs(coeffs - np.conj(coeffs[::-1]))) > 1e-9:
                raise ValueError("coefficients must satisfy c_{-n} = conj(c_n)")
        coeffs = coeffs.copy()
        coeffs.flags.writeable = False
        self.max_mode = int(max_mode)
        self.coeffs = coeffs

    @classmethod
    def uniform(cls, max_mode):
        c = np.zeros(2 * max_mode + 1, dtype=complex)
        c[max_mode] = UNIFORM_C0
        return cls(max_mode, c, validate=False)

    @classmethod
    def from_coeffs(cls, coeffs, enforce=True):
        """Build a density, symmetrizing and renormalizing to the invariants."""
        coeffs = np.asarray(coeffs, dtype=complex)
        n = (coeffs.size - 1) // 2
        if enforce:
            coeffs = 0.5 * (coeffs + np.conj(coeffs[::-1]))
            coeffs = coeffs.copy()
            coeffs[n] = UNIFORM_C0
        return cls(n, coeffs, validate=not enforce)

    @classmethod
    def from_grid(cls, values, max_mode=None):
        """Project grid samples on a uniform theta grid (no endpoint) to coefficients.

        The samples are renormalized to unit mass before projection.
        """
        values = np.asarray(values, dtype=float)
        npts = values.size
        mass = values.mean() * TWO_PI
        if mass <= 0:
            raise ValueError("grid values must have positive mass")
        values = values / mass
        if max_mode is None:
            max_mode = (npts - 1) // 2
        if 2 * max_mode + 1 > npts:
            raise ValueError("max_mode too large for grid resolution")
        raw = np.fft.fft(values) / npts
        coeffs = np.empty(2 * max_mode + 1, dtype=complex)
        for n in range(-max_mode, max_mode + 1):
            coeffs[n + max_mode] = raw[n % npts]
        return cls.from_coeffs(coeffs)

    def coefficient(self, n):
        if abs(n) > self.max_mode:
            return 0.0 + 0.0j
        return complex(self.coeffs[n + self.max_mode])

    def to_grid(self, n_points=512):
        """Sample the density on a uniform grid of n_points nodes in [0, 2 pi)."""
        raw = np.zeros(n_points, dtype=complex)
        for n in range(-self.max_mode, self.max_mode + 1):
            raw[n % n_points] += self.coeffs[n + self.max_mode]
        return np.fft.ifft(raw).real * n_points

    def evaluate(self, theta):
        theta = np.asarray(theta, dtype=float)
        n = np.arange(-self.max_mode, self.max_mode + 1)
        return np.real(np.exp(1j * np.outer(theta, n)) @ self.coeffs)

    def rotated(self, angle):
        """Density theta -> rho(theta + angle)."""
        n = np.arange(-self.max_mode, self.max_mode + 1)
        return AngularDensity(self.max_mode, self.coeffs * np.exp(1j * n * angle),
                              validate=False)

    def l1_distance(self, other, n_points=512):
        a = self.to_grid(n_points)
        b = other.to_grid(n_points)
        return float(np.abs(a - b).mean() * TWO_PI)

    def __repr__(self):
        return f"AngularDensity(max_mode={self.max_mode})"


@dataclass(frozen=True)
class FourierMoments:
    """Global Fourier moments of order k: integrals of cos/sin(k theta) against rho."""

    order: int
    cos_moment: float
    sin_moment: float


@dataclass(frozen=True)
class TrigPolynomial:
    """Zero-mean trigonometric polynomial sum_k [cos_k cos(k th) + sin_k sin(k th)]."""

    cos_coeffs: tuple
    sin_coeffs: tuple

    @property
    def degree(self):
        return len(self.cos_coeffs)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        for k, (ck, sk) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            out = out + ck * np.cos(k * theta) + sk * np.sin(k * theta)
        return out

    def complex_coefficient(self, n):
        """Coefficient on exp(i n theta)."""
        k = abs(n)
        if k == 0 or k > self.degree:
            return 0.0 + 0.0j
        c = 0.5 * (self.cos_coeffs[k - 1] - 1j * math.copysign(1, n) * self.sin_coeffs[k - 1])
        return complex(c)


@dataclass(frozen=True)
class PotentialSpec:
    """Angular potential U(theta) = linear_slope * theta + periodic trig part."""

    linear_slope: float
    cos_coeffs: tuple
    sin_coeffs: tuple

    def periodic(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        for k, (ck, sk) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            out = out + ck * np.cos(k * theta) + sk * np.sin(k * theta)
        return out

    def __call__(self, theta):
        return self.linear_slope * np.asarray(theta, dtype=float) + self.periodic(theta)

    def derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full_like(theta, self.linear_slope)
        for k, (ck, sk) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            out = out - k * ck * np.sin(k * theta) + k * sk * np.cos(k * theta)
        return out

    @property
    def amplitude(self):
        """Crude upper bound on the periodic part, for overflow guards."""
        return float(sum(abs(c) + abs(s) for c, s in zip(self.cos_coeffs, self.sin_coeffs)))


def moments(rho, k):
    """Exact Fourier moments of order k computed from the stored coefficients."""
    if k < 1:
        raise ValueError("moment order must be >= 1")
    if k > rho.max_mode:
        raise ValueError(f"moment order {k} exceeds max_mode {rho.max_mode}")
    ck = rho.coefficient(k)
    return FourierMoments(
        order=k,
        cos_moment=float(TWO_PI * ck.real),
        sin_moment=float(-TWO_PI * ck.imag),
    )


def interaction_field(rho, params):
    """Alignment field of a spatially homogeneous density as a trig polynomial.

    I[rho](theta) = kappa0 * sum_k k a_k [sin(k th) r_{k,c} - cos(k th) r_{k,s}].
    """
    if params.degree > rho.max_mode:
        raise ValueError("potential degree exceeds density max_mode")
    cos_c = []
    sin_c = []
    for k, a_k in enumerate(params.potential, start=1):
        m = moments(rho, k)
        sin_c.append(params.kappa0 * k * a_k * m.cos_moment)
        cos_c.append(-params.kappa0 * k * a_k * m.sin_moment)
    return TrigPolynomial(cos_coeffs=tuple(cos_c), sin_coeffs=tuple(sin_c))


def angular_potential(rho, params):
    """Potential U with dU/dtheta = -(F - h sin th - gamma I[rho](th))."""
    inter = interaction_field(rho, params)
    deg = max(1, inter.degree)
    cos_c = [0.0] * deg
    sin_c = [0.0] * deg
    cos_c[0] -= params.field
    g = params.coupling
    for k in range(1, inter.degree + 1):
        # I has sin_k = kappa0 k a_k r_{k,c}, cos_k = -kappa0 k a_k r_{k,s};
        # U needs -gamma kappa0 a_k (r_{k,c} cos + r_{k,s} sin).
        cos_c[k - 1] += -g * inter.sin_coeffs[k - 1] / k
        sin_c[k - 1] += g * inter.cos_coeffs[k - 1] / k
    return PotentialSpec(
        linear_slope=-params.tilt,
        cos_coeffs=tuple(cos_c),
        sin_coeffs=tuple(sin_c),
    )


def drift_coefficients(rho, params):
    """Complex Fourier coefficients of b(th) = F - h sin th - gamma I[rho](th).

    Returns an array b_j for j = -deg..deg where deg = len(potential).
    """
    inter = interaction_field(rho, params)
    deg = max(1, inter.degree)
    b = np.zeros(2 * deg + 1, dtype=complex)
    b[deg] = params.tilt
    b[deg + 1] += 0.5j * params.field
    b[deg - 1] += -0.5j * params.field
    for j in range(1, inter.degree + 1):
        b[deg + j] += -params.coupling * inter.complex_coefficient(j)
        b[deg - j] += -params.coupling * inter.complex_coefficient(-j)
    return b
