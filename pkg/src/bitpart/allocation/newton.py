import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import torch
from dataclasses_json import dataclass_json

logger = logging.getLogger(__name__)

Function = Callable[[torch.Tensor], torch.Tensor]


@dataclass_json
@dataclass(frozen=True)
class NewtonConfig:
    """
    Configuration parameters for the projected Newton solver.

    gradient_tolerance: Stop once the projected-gradient norm ||P(x - ∇f) - x|| falls below this value.
    max_iterations: Maximum number of accepted Newton steps before giving up.
    armijo: Sufficient decrease constant of the backtracking line search.
    backtrack_factor: Step shrink factor of the line search.
    min_step: Smallest step length tried before the search falls back to a projected-gradient direction.
    initial_regularization: First multiple of the identity added to a Hessian that is not positive definite;
        doubled until the Cholesky factorization succeeds.
    """

    gradient_tolerance: float = 1e-6
    max_iterations: int = 100
    armijo: float = 1e-4
    backtrack_factor: float = 0.5
    min_step: float = 1e-12
    initial_regularization: float = 1e-8


@dataclass(frozen=True)
class NewtonResult:
    """The accepted point of a projected Newton run and its history."""

    x: torch.Tensor
    value: float
    iterations: int
    gradient_norm: float
    trace: tuple[float, ...] = field(default_factory=tuple)


class ConvergenceError(RuntimeError):
    """The solver did not reach its gradient tolerance; carries the last iterate."""

    def __init__(self, message: str, x: torch.Tensor, gradient_norm: float):
        super().__init__(f"{message} (projected gradient norm {gradient_norm:.3e})")
        self.x = x
        self.gradient_norm = gradient_norm


def projected_gradient(x: torch.Tensor, grad: torch.Tensor, project: Function) -> torch.Tensor:
    return project(x - grad) - x


def regularized_cholesky(hessian: torch.Tensor, initial_regularization: float) -> torch.Tensor:
    """
    Cholesky factor of `hessian + λI` with the smallest λ in {0, λ0, 2λ0, 4λ0, ...} that factorizes.

    Raises:
        ValueError: If no λ up to 1e12 makes the matrix positive definite.
    """
    identity = torch.eye(hessian.shape[0], dtype=hessian.dtype)
    factor, info = torch.linalg.cholesky_ex(hessian)
    regularization = initial_regularization
    while info != 0:
        factor, info = torch.linalg.cholesky_ex(hessian + regularization * identity)
        regularization *= 2
        if regularization > 1e12:
            raise ValueError(f"Hessian could not be regularized with up to {regularization / 2:.1e} times the identity")
    return factor


def minimize_projected_newton(
    objective: Function,
    gradient: Function,
    hessian: Function,
    x0: torch.Tensor,
    project: Function,
    lower: torch.Tensor,
    upper: torch.Tensor,
    config: Optional[NewtonConfig] = None,
) -> NewtonResult:
    """
    Minimize a smooth function over a convex set with a projected Newton method.

    Coordinates sitting on their bound with the gradient pointing outwards are held fixed; the Newton step is taken on
    the remaining coordinates with a regularized Hessian and followed along the projection arc with Armijo
    backtracking. If the arc search fails the projected-gradient direction is tried instead.

    Args:
        objective: f(x), a scalar tensor.
        gradient: ∇f(x).
        hessian: ∇²f(x).
        x0: Feasible starting point.
        project: Euclidean projection onto the feasible set.
        lower: Lower bounds used to identify binding coordinates.
        upper: Upper bounds used to identify binding coordinates.
        config: Solver settings.

    Returns:
        The final iterate, its value, the number of accepted Newton iterations and the objective after each one.
    """
    config = config if config is not None else NewtonConfig()
    x = project(x0.clone())
    value = float(objective(x))
    trace = [value]

    for iteration in range(config.max_iterations + 1):
        grad = gradient(x)
        step_to_projection = projected_gradient(x, grad, project)
        gradient_norm = float(torch.linalg.vector_norm(step_to_projection))
        logger.debug(f"Newton iteration {iteration}: objective {value:.12g}, projected gradient {gradient_norm:.3e}")
        if gradient_norm <= config.gradient_tolerance:
            return NewtonResult(x=x, value=value, iterations=iteration, gradient_norm=gradient_norm, trace=tuple(trace))
        if iteration == config.max_iterations:
            break

        margin = min(gradient_norm, 1e-8)
        binding = ((x <= lower + margin) & (grad > 0)) | ((x >= upper - margin) & (grad < 0))
        free = ~binding

        direction = torch.zeros_like(x)
        if free.any():
            reduced = hessian(x)[free][:, free]
            try:
                factor = regularized_cholesky(reduced, config.initial_regularization)
            except ValueError as e:
                raise ConvergenceError(str(e), x, gradient_norm) from e
            direction[free] = -torch.cholesky_solve(grad[free][:, None], factor).squeeze(-1)

        accepted = _arc_search(objective, x, value, grad, direction, project, config)
        if accepted is None:
            accepted = _arc_search(objective, x, value, grad, -grad, project, config)
        if accepted is None:
            raise ConvergenceError("Line search failed to decrease the objective", x, gradient_norm)
        x, value = accepted
        trace.append(value)

    raise ConvergenceError(f"No convergence after {config.max_iterations} iterations", x, gradient_norm)


def _arc_search(
    objective: Function,
    x: torch.Tensor,
    value: float,
    grad: torch.Tensor,
    direction: torch.Tensor,
    project: Function,
    config: NewtonConfig,
) -> Optional[tuple[torch.Tensor, float]]:
    """Backtrack along the projection arc P(x + αd) until the Armijo condition holds."""
    step = 1.0
    while step >= config.min_step:
        candidate = project(x + step * direction)
        candidate_value = float(objective(candidate))
        if candidate_value <= value + config.armijo * float(grad @ (candidate - x)):
            if torch.equal(candidate, x):
                return None
            return candidate, candidate_value
        step *= config.backtrack_factor
    return None
