"""
Frechet-Modul für FMD-Stats
===========================

Gauß-Momente von Feature-Mengen und die Fréchet-Distanz

    FMD = ||mu_g - mu_r||^2 + Tr(Sigma_r + Sigma_g - 2 sqrt(Sigma_g Sigma_r))

Der Kreuzterm wird symmetrisch berechnet:

    Tr sqrt(Sigma_g Sigma_r) = Tr sqrt(S_r Sigma_g S_r) = ||S_g S_r||_*    (S = sqrt(Sigma))

also als Summe der Singulärwerte von S_g S_r. Die Wurzeln der
Kovarianzen kommen aus einer symmetrischen Eigenzerlegung mit auf 0
geklemmten negativen Eigenwerten. Über die Singulärwerte entfällt die
zweite Wurzel, deren Fehler bei (nahezu) singulären Kovarianzen auf
sqrt(eps) * ||Sigma|| anwächst.

Dateiformat STATS1:
-------------------
    # estimator=unbiased
    STATS1 <d> <n>
    <mu: d Werte>
    <d Zeilen der Kovarianzmatrix>
"""

import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, EigenFailure, InsufficientSamples, NotSymmetric, ParseError, ValidationError
from .formats import format_reals, parse_header, parse_int, parse_reals, read_lines

logger = logging.getLogger(__name__)

# Nenner der Kovarianz: n - ddof
ESTIMATORS: Dict[str, int] = {
    'unbiased': 1,
    'ml': 0,
}
DEFAULT_ESTIMATOR = 'unbiased'

SYMMETRY_TOLERANCE = 1e-8
PSD_TOLERANCE = 1e-8
STABILIZER = 1e-10
NEGATIVE_WARNING = 1e-6


@dataclass(frozen=True, eq=False)
class GaussianStats:
    """Mittelwert, Kovarianz und Stichprobenumfang einer Feature-Menge"""

    mu: np.ndarray
    sigma: np.ndarray
    n: int
    estimator: str = DEFAULT_ESTIMATOR

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float64).reshape(-1)
        sigma = np.array(self.sigma, dtype=np.float64)
        dim = mu.shape[0]

        if dim < 1:
            raise DimensionMismatch("Mittelwert ohne Dimension")
        if sigma.shape != (dim, dim):
            raise DimensionMismatch(f"Kovarianz mit Form ({dim}, {dim}) erwartet, {sigma.shape} erhalten")
        if int(self.n) < 2:
            raise InsufficientSamples(f"Mindestens 2 Stichproben benötigt, n={self.n}")
        if self.estimator not in ESTIMATORS:
            raise ValidationError(f"Unbekannter Schätzer '{self.estimator}'")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise ValidationError("Statistik enthält nicht-endliche Werte")

        sigma = (sigma + sigma.T) / 2.0
        eigenvalues = scipy.linalg.eigvalsh(sigma)
        if eigenvalues[0] < -PSD_TOLERANCE * max(1.0, eigenvalues[-1]):
            raise ValidationError(f"Kovarianz nicht positiv semidefinit (Eigenwert {eigenvalues[0]:.3e})")

        mu.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, 'mu', mu)
        object.__setattr__(self, 'sigma', sigma)
        object.__setattr__(self, 'n', int(self.n))

    @property
    def dim(self) -> int:
        return self.mu.shape[0]


def fit_gaussian(features, covariance: str = DEFAULT_ESTIMATOR) -> GaussianStats:
    """
    Schätzt Mittelwert und Kovarianz einer Feature-Menge

    Args:
        features: n x d Array (oder Liste von d-Vektoren)
        covariance: 'unbiased' (Nenner n-1) oder 'ml' (Nenner n)

    Returns:
        GaussianStats mit symmetrisierter Kovarianz (S + S^T) / 2

    Raises:
        InsufficientSamples: Bei n < 2
        DimensionMismatch: Bei Vektoren unterschiedlicher Länge
    """
    if covariance not in ESTIMATORS:
        raise ValidationError(f"Unbekannter Schätzer '{covariance}' (erlaubt: {', '.join(ESTIMATORS)})")
    try:
        data = np.array(features, dtype=np.float64)
    except ValueError:
        raise DimensionMismatch("Feature-Vektoren haben unterschiedliche Dimensionen") from None
    if data.ndim == 1 and data.shape[0] == 0:
        raise InsufficientSamples("Keine Feature-Vektoren")
    if data.ndim != 2:
        raise DimensionMismatch(f"Features mit Form (n, d) erwartet, {data.shape} erhalten")

    count = data.shape[0]
    if count < 2:
        raise InsufficientSamples(f"Mindestens 2 Feature-Vektoren benötigt, n={count}")

    mu = data.mean(axis=0)
    centered = data - mu
    sigma = centered.T @ centered / (count - ESTIMATORS[covariance])
    return GaussianStats(mu, (sigma + sigma.T) / 2.0, count, covariance)


def sqrtm_psd(matrix: np.ndarray) -> np.ndarray:
    """
    Wurzel einer symmetrischen positiv semidefiniten Matrix

    A = Q diag(w) Q^T, negative Eigenwerte werden auf 0 geklemmt,
    S = Q diag(sqrt(w)) Q^T.

    Raises:
        DimensionMismatch: Wenn die Matrix nicht quadratisch ist
        NotSymmetric: Wenn |A - A^T| > 1e-8 * max(1, |A|)
        EigenFailure: Bei nicht-endlichen Werten oder fehlender Konvergenz
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"Quadratische Matrix erwartet, {a.shape} erhalten")
    if not np.all(np.isfinite(a)):
        raise EigenFailure("Matrix enthält nicht-endliche Werte")

    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    asymmetry = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asymmetry > SYMMETRY_TOLERANCE * scale:
        raise NotSymmetric(f"Matrix nicht symmetrisch (Abweichung {asymmetry:.3e})")

    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh((a + a.T) / 2.0)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenFailure(f"Eigenzerlegung fehlgeschlagen: {e}") from e

    root = (eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ eigenvectors.T
    return (root + root.T) / 2.0


def trace_sqrt_product(sigma_r: np.ndarray, sigma_g: np.ndarray) -> float:
    """Tr sqrt(S_r Sigma_g S_r) als Nuklearnorm von S_g S_r"""
    product = sqrtm_psd(sigma_g) @ sqrtm_psd(sigma_r)
    try:
        singular = scipy.linalg.svdvals(product)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenFailure(f"Singulärwertzerlegung fehlgeschlagen: {e}") from e
    return float(np.sum(singular))


def frechet_distance(r: GaussianStats, g: GaussianStats) -> float:
    """
    Fréchet-Distanz zwischen Referenz- (r) und generierter (g) Verteilung

    Schlägt die Zerlegung fehl, wird einmalig mit eps * I
    (eps = 1e-10 * mittlere Diagonale) auf beiden Kovarianzen wiederholt.
    Negative Ergebnisse werden auf 0 geklemmt; liegen sie unter
    -1e-6 * (1 + Tr Sigma_r + Tr Sigma_g), wird gewarnt.

    Returns:
        FMD >= 0

    Raises:
        DimensionMismatch: Bei unterschiedlichen Dimensionen
        EigenFailure: Wenn auch der stabilisierte Versuch scheitert
    """
    if r.dim != g.dim:
        raise DimensionMismatch(f"Dimensionen verschieden: {r.dim} und {g.dim}")

    sigma_r, sigma_g = r.sigma, g.sigma
    try:
        cross = trace_sqrt_product(sigma_r, sigma_g)
        if not np.isfinite(cross):
            raise EigenFailure("Kreuzterm nicht endlich")
    except EigenFailure as e:
        eps = STABILIZER * float(np.mean(np.concatenate([np.diag(sigma_r), np.diag(sigma_g)])))
        logger.debug("Fréchet: %s - Wiederholung mit eps=%.3e", e, eps)
        offset = eps * np.eye(r.dim)
        sigma_r, sigma_g = sigma_r + offset, sigma_g + offset
        cross = trace_sqrt_product(sigma_r, sigma_g)

    diff = g.mu - r.mu
    trace_r = float(np.trace(sigma_r))
    trace_g = float(np.trace(sigma_g))
    value = float(diff @ diff) + trace_r + trace_g - 2.0 * cross

    if value < -NEGATIVE_WARNING * (1.0 + trace_r + trace_g):
        logger.warning("Fréchet-Distanz vor Klemmung deutlich negativ (%.6e) - numerische Probleme?", value)
    return max(value, 0.0)


def frechet_distance_from_features(real: np.ndarray, generated: np.ndarray,
                                   covariance: str = DEFAULT_ESTIMATOR) -> float:
    """FMD direkt aus zwei Feature-Mengen"""
    return frechet_distance(fit_gaussian(real, covariance), fit_gaussian(generated, covariance))


def save_stats(stats: GaussianStats, path) -> None:
    """Speichert GaussianStats im STATS1-Format"""
    lines = [f"# estimator={stats.estimator}",
             f"STATS1 {stats.dim} {stats.n}",
             format_reals(stats.mu)]
    lines.extend(format_reals(row) for row in stats.sigma)
    with open(path, 'w', encoding='utf-8') as f:
        f.write('\n'.join(lines) + '\n')


def load_stats(path) -> GaussianStats:
    """
    Lädt GaussianStats im STATS1-Format

    Raises:
        ParseError: Bei fehlerhaftem Aufbau
    """
    lines, comments = read_lines(path)
    header = parse_header(lines, 'STATS1', 2)
    dim = parse_int(header[0], lines[0][0], 'd', minimum=1)
    count = parse_int(header[1], lines[0][0], 'n', minimum=2)
    if len(lines) != dim + 2:
        raise ParseError(lines[-1][0], f"{dim + 2} Zeilen erwartet, {len(lines)} gefunden")

    estimator = DEFAULT_ESTIMATOR
    for comment in comments:
        if comment.startswith('estimator='):
            estimator = comment.split('=', 1)[1].strip()

    mu = parse_reals(lines[1][1], lines[1][0], expected=dim)
    sigma = np.stack([parse_reals(text, number, expected=dim) for number, text in lines[2:]])
    return GaussianStats(mu, sigma, count, estimator)
