"""Exception types shared across the package."""


class ChiralTrainError(Exception):
    """Base class for package-specific errors."""


class ConfigError(ChiralTrainError, ValueError):
    """Run configuration failed schema validation.

    `keys` lists the offending configuration keys (dotted paths).
    """

    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = tuple(keys)


class BasisTooSmallError(ChiralTrainError, RuntimeError):
    """Basis truncation rule violated: population leaked into the top shells."""

    def __init__(self, population, n_max, suggestion=None):
        self.population = population
        self.n_max = n_max
        self.suggestion = suggestion if suggestion is not None else n_max + 6
        super().__init__(
            f"top two N shells hold population {population:.3e} >= 1e-06 at "
            f"n_max={n_max}; increase n_max (try n_max={self.suggestion})"
        )

    def __reduce__(self):
        return (type(self), (self.population, self.n_max, self.suggestion))


class ScanCellError(ChiralTrainError, RuntimeError):
    """A scan cell failed; carries the grid coordinates of the cell."""

    def __init__(self, tau_fs, delta_rad, i_tau, j_delta, cause):
        self.tau_fs = tau_fs
        self.delta_rad = delta_rad
        self.i_tau = i_tau
        self.j_delta = j_delta
        self.cause = cause
        super().__init__(
            f"scan cell (tau={tau_fs:g} fs, delta={delta_rad:g} rad) "
            f"at index [{i_tau},{j_delta}] failed: {cause}"
        )

    def __reduce__(self):
        return (type(self), (self.tau_fs, self.delta_rad, self.i_tau, self.j_delta, self.cause))
