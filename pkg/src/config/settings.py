"""
Configuration management for the Rivlin cube toolkit.
"""

import sys
from dataclasses import dataclass
from typing import Optional

from core.errors import ParameterDomainError, require_material_m
from core.material import RADIAL_CONDITION_DOMAIN, RADIAL_CONDITION_SAMPLES, MaterialParams


@dataclass(frozen=True)
class RunConfig:
    """Resolved material and output options for one CLI invocation."""

    M: float
    mu: Optional[float] = None
    lam: Optional[float] = None
    out: Optional[str] = None
    fmt: str = "csv"
    seed: int = 42
    tol: float = 1e-9

    @property
    def scaled(self) -> bool:
        """True when physical (mu, lambda) were given and outputs can be rescaled."""
        return self.mu is not None

    def meta(self) -> dict:
        meta = {"M": self.M, "seed": self.seed, "tol": self.tol}
        if self.scaled:
            meta["mu"] = self.mu
            meta["lambda"] = self.lam
        return meta


class Settings:
    """Centralized configuration management."""

    def __init__(self):
        self.load_default_settings()

    def load_default_settings(self):
        """Load default configuration settings."""
        self.version = "1.0.0"

        # Classification tolerances
        self.classification_tol = 1e-9
        self.coincidence_rel = 1e-8

        # Solver tolerances
        self.onset_tol = 1e-8
        self.residual_tol = 1e-9
        self.newton_tol = 1e-10
        self.newton_max_iter = 100
        self.cluster_tol = 1e-4
        self.distinct_gap = 1e-6

        # Sampling
        self.radial_condition_domain = RADIAL_CONDITION_DOMAIN
        self.radial_condition_samples = RADIAL_CONDITION_SAMPLES
        self.verify_samples_full = 100
        self.verify_samples_quick = 20
        self.distinct_trials = 200
        self.default_seed = 42

        # Output
        self.output_format = "csv"

    def display_settings(self, stream=None):
        """Display current configuration settings (stderr by default; stdout may carry data)."""
        stream = stream or sys.stderr
        lines = [
            "--- Current Settings ---",
            f"Version: {self.version}",
            f"Classification tolerance: {self.classification_tol}",
            f"Coincidence threshold (relative): {self.coincidence_rel}",
            f"Onset tolerance: {self.onset_tol}",
            f"Newton: tol={self.newton_tol}, max_iter={self.newton_max_iter}",
            f"Verification samples: full={self.verify_samples_full}, quick={self.verify_samples_quick}",
            f"Distinct-stretch trials: {self.distinct_trials}",
            f"Output format: {self.output_format}",
        ]
        for line in lines:
            print(line, file=stream)

    def verify_samples(self, quick: bool) -> int:
        """Number of random samples per verification property."""
        return self.verify_samples_quick if quick else self.verify_samples_full

    def resolve_run_config(self, args) -> RunConfig:
        """
        Build a RunConfig from parsed command-line flags.

        Exactly one of --m or the pair --mu/--lambda must be given; with the
        pair, M = (lambda + 2 mu / 3) / mu.
        """
        m = getattr(args, "m", None)
        mu = getattr(args, "mu", None)
        lam = getattr(args, "lam", None)

        if m is not None and (mu is not None or lam is not None):
            raise ParameterDomainError("give either --m or the pair --mu/--lambda, not both")
        if m is None:
            if mu is None or lam is None:
                raise ParameterDomainError("give --m or both --mu and --lambda")
            params = MaterialParams(mu=float(mu), lam=float(lam))
            M = params.M
            mu, lam = params.mu, params.lam
        else:
            M = require_material_m(m)

        tol = getattr(args, "tol", None)
        tol = self.classification_tol if tol is None else float(tol)
        if tol < 0:
            raise ParameterDomainError(f"--tol must be non-negative, got {tol!r}")
        seed = getattr(args, "seed", None)

        return RunConfig(
            M=M,
            mu=mu,
            lam=lam,
            out=getattr(args, "out", None),
            fmt=getattr(args, "format", None) or self.output_format,
            seed=self.default_seed if seed is None else int(seed),
            tol=tol,
        )
