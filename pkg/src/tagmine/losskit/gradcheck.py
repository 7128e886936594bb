"""
Central finite-difference checks of the analytic loss gradients.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np

from ..corpus import make_rng
from ..errors import PreconditionError
from .alignment import itc_loss, itm_loss
from .sequence import lm_loss
from .tagging import asl_loss, bce_loss
from .types import IGNORE, PAD, EmbeddingBatch, FocusParams, TokenBatch

logger = logging.getLogger(__name__)

KERNELS = ("bce", "asl", "lm", "itc", "itm")
DEFAULT_STEP = 1e-5
DEFAULT_TOLERANCE = 1e-4

# One check: scalar function of x, the point x, and the analytic gradient at x.
Check = Tuple[Callable[[np.ndarray], float], np.ndarray, np.ndarray]


def numeric_gradient(func: Callable[[np.ndarray], float], x: np.ndarray, h: float = DEFAULT_STEP) -> np.ndarray:
    """Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every entry of x."""
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in range(x.size):
        original = x.flat[i]
        x.flat[i] = original + h
        plus = func(x)
        x.flat[i] = original - h
        minus = func(x)
        x.flat[i] = original
        grad.flat[i] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Norm-wise relative error |a - n| / max(|a|, |n|, 1e-12)."""
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-12)
    return float(np.linalg.norm(analytic - numeric) / scale)


def check_gradient(
    func: Callable[[np.ndarray], float], x: np.ndarray, analytic: np.ndarray, h: float = DEFAULT_STEP
) -> float:
    """
    Compare an analytic gradient with central finite differences.

    Args:
        func: Scalar loss as a function of x.
        x: Point of evaluation; not modified.
        analytic: The analytic gradient of func at x.
        h: Finite-difference step.

    Returns:
        The norm-wise relative error.
    """
    return relative_error(np.asarray(analytic, dtype=np.float64), numeric_gradient(func, x, h))


def _random_probs(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.uniform(0.05, 0.95, size=shape)


def _random_labels(rng: np.random.Generator, shape) -> np.ndarray:
    labels = rng.integers(IGNORE, 2, size=shape)
    labels[0, 0] = 1
    return labels


def _bce_checks(rng, focus, temperature) -> List[Check]:
    labels = _random_labels(rng, (3, 4))
    probs = _random_probs(rng, (3, 4))
    return [(lambda x: bce_loss(labels, x)[0], probs, bce_loss(labels, probs)[1])]


def _asl_checks(rng, focus, temperature) -> List[Check]:
    labels = _random_labels(rng, (4, 6))
    probs = _random_probs(rng, (4, 6))
    return [(lambda x: asl_loss(labels, x, focus)[0], probs, asl_loss(labels, probs, focus)[1])]


def _lm_checks(rng, focus, temperature) -> List[Check]:
    logits = rng.normal(size=(5, 7))
    targets = rng.integers(0, 7, size=5)
    targets[rng.random(5) < 0.2] = PAD
    targets[0] = rng.integers(0, 7)
    analytic = lm_loss(TokenBatch(logits, targets))[1]
    return [(lambda x: lm_loss(TokenBatch(x, targets))[0], logits, analytic)]


def _itc_checks(rng, focus, temperature) -> List[Check]:
    image = rng.normal(size=(4, 8))
    text = rng.normal(size=(4, 8))
    _, grad_image, grad_text = itc_loss(EmbeddingBatch(image, text, temperature))
    return [
        (lambda x: itc_loss(EmbeddingBatch(x, text, temperature))[0], image, grad_image),
        (lambda x: itc_loss(EmbeddingBatch(image, x, temperature))[0], text, grad_text),
    ]


def _itm_checks(rng, focus, temperature) -> List[Check]:
    probs = rng.uniform(0.05, 0.95, size=10)
    labels = rng.integers(0, 2, size=10)
    return [(lambda x: itm_loss(x, labels)[0], probs, itm_loss(probs, labels)[1])]


_CHECK_BUILDERS = {
    "bce": _bce_checks,
    "asl": _asl_checks,
    "lm": _lm_checks,
    "itc": _itc_checks,
    "itm": _itm_checks,
}


@dataclass(frozen=True)
class GradcheckRow:
    kernel: str
    instances: int
    max_relative_error: float
    passed: bool


def gradcheck_suite(
    kernels: Sequence[str] = KERNELS,
    instances: int = 100,
    seed: int = 0,
    focus: FocusParams = FocusParams(),
    temperature: float = 0.07,
    tolerance: float = DEFAULT_TOLERANCE,
    h: float = DEFAULT_STEP,
) -> List[GradcheckRow]:
    """
    Check every kernel's gradient on randomized instances.

    Args:
        kernels: Kernel names from KERNELS.
        instances: Random instances per kernel.
        seed: Seed of the instance generator.
        focus: Focusing exponents for the asymmetric loss.
        temperature: Contrastive loss temperature.
        tolerance: Largest relative error that passes.
        h: Finite-difference step.

    Returns:
        One report row per kernel.
    """
    if instances < 1:
        raise PreconditionError(f"instances must be >= 1, got {instances}")
    unknown = [k for k in kernels if k not in _CHECK_BUILDERS]
    if unknown:
        raise PreconditionError(f"unknown loss kernel(s): {', '.join(unknown)} (choose from {', '.join(KERNELS)})")

    rows = []
    for kernel in kernels:
        rng = make_rng(seed)
        worst = 0.0
        for _ in range(instances):
            for func, x, analytic in _CHECK_BUILDERS[kernel](rng, focus, temperature):
                worst = max(worst, check_gradient(func, x, analytic, h))
        row = GradcheckRow(kernel, instances, worst, worst < tolerance)
        logger.info(f"gradcheck {kernel}: max relative error {worst:.3e} over {instances} instances")
        rows.append(row)
    return rows


def format_report(rows: Iterable[GradcheckRow]) -> str:
    """Plain-text table: kernel, instances, max relative error, PASS/FAIL."""
    lines = [f"{'kernel':<8}{'instances':>10}  {'max_rel_error':>14}  result"]
    for row in rows:
        lines.append(
            f"{row.kernel:<8}{row.instances:>10}  {row.max_relative_error:>14.3e}  {'PASS' if row.passed else 'FAIL'}"
        )
    return "\n".join(lines) + "\n"
