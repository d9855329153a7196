#!python3

## Import General Tools
import warnings
import numpy as np
from scipy import linalg
from scipy import special
from scipy.integrate import quad, IntegrationWarning


class NumericsError(ValueError): pass


class ConvergenceError(NumericsError):
    '''Raised when an iterative routine hits its iteration cap.  The best
    estimate obtained so far is kept on the `estimate` attribute.
    '''
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


##-------------------------------------------------------------------------
## Matrix helpers
##-------------------------------------------------------------------------
def as_cmatrix(h, name='matrix'):
    '''Return `h` as a 2D complex128 array, rejecting NaN/Inf entries.
    '''
    h = np.atleast_2d(np.asarray(h, dtype=np.complex128))
    if h.ndim != 2:
        raise NumericsError(f'{name} must be two dimensional, got {h.ndim}')
    if not np.all(np.isfinite(h)):
        raise NumericsError(f'{name} has non-finite entries')
    return h


def hermitian_solve(a, b):
    '''Solve a x = b for Hermitian positive definite `a` via Cholesky.
    '''
    factor = linalg.cho_factor(a, lower=True, check_finite=False)
    return linalg.cho_solve(factor, b, check_finite=False)


def quadratic_forms(a, vectors):
    '''Return v^H a^{-1} v for each column v of `vectors` (real part), with
    `a` Hermitian positive definite.
    '''
    x = hermitian_solve(a, vectors)
    return np.real(np.einsum('ij,ij->j', np.conj(vectors), x))


##-------------------------------------------------------------------------
## logdet2_capacity
##-------------------------------------------------------------------------
def logdet2_capacity(h, scale):
    '''Return log2|I + scale * h h^H| computed from the Cholesky factor of
    the smaller of the two equivalent Gram forms.

    Parameters
    ----------
    h : array_like (m x n), complex
        The channel or sub-channel matrix.

    scale : float
        The per-stream SNR, rho/L_t.  Must be positive.
    '''
    h = as_cmatrix(h, name='h')
    if not scale > 0:
        raise NumericsError(f'scale must be positive, got {scale}')
    m, n = h.shape
    if m <= n:
        gram = h @ h.conj().T
    else:
        gram = h.conj().T @ h
    gram = np.eye(gram.shape[0]) + scale * gram
    chol = linalg.cholesky(gram, lower=True, check_finite=False)
    return max(0.0, float(2.0 * np.sum(np.log2(np.real(np.diag(chol))))))


def logdet2_capacity_batch(stack, scale):
    '''Vectorized logdet2_capacity over a stack of matrices shaped
    (k, m, n).  Used by the exhaustive search.
    '''
    stack = np.asarray(stack, dtype=np.complex128)
    m, n = stack.shape[-2:]
    if m <= n:
        gram = stack @ np.conj(np.swapaxes(stack, -1, -2))
    else:
        gram = np.conj(np.swapaxes(stack, -1, -2)) @ stack
    gram = np.eye(gram.shape[-1]) + scale * gram
    chol = np.linalg.cholesky(gram)
    diag = np.real(np.diagonal(chol, axis1=-2, axis2=-1))
    return np.maximum(0.0, 2.0 * np.sum(np.log2(diag), axis=-1))


##-------------------------------------------------------------------------
## erf_inv
##-------------------------------------------------------------------------
def erf_inv(x):
    '''Inverse error function on (-1, 1).

    `scipy.special.erfinv` followed by one Newton step on erf.  The Newton
    residual is formed from erfc for |x| > 0.5 so that it keeps its
    accuracy as x approaches +/-1.
    '''
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(np.abs(x) >= 1):
        raise NumericsError('erf_inv is only defined on the open interval '
                            '(-1, 1)')
    v = special.erfinv(x)
    sign = np.sign(x)
    ax = np.abs(x)
    av = np.abs(v)
    residual = np.where(ax > 0.5,
                        (1.0 - ax) - special.erfc(av),
                        special.erf(av) - ax)
    slope = 2.0 / np.sqrt(np.pi) * np.exp(-av**2)
    av = av - residual / slope
    result = sign * av
    return float(result) if result.ndim == 0 else result


##-------------------------------------------------------------------------
## integrate_to_infinity
##-------------------------------------------------------------------------
def integrate_to_infinity(f, lower, abs_tol=1e-8, points=None,
                          initial_span=1.0, max_doublings=60):
    '''Integrate `f` from `lower` to +infinity.

    The upper limit starts at `lower + initial_span` and is doubled until
    |f| at the upper limit falls below abs_tol/100.  Each further doubling
    adds the integral over the new panel; the loop stops once two successive
    doublings each change the result by less than abs_tol.

    Parameters
    ----------
    f : callable
        Continuous integrand which eventually decays monotonically to 0.

    lower : float
        The lower limit.

    abs_tol : float
        The requested absolute accuracy.

    points : sequence of float or None
        Interior points where the integrand changes quickly.  They are
        handed to `scipy.integrate.quad` for the panels which contain them.

    Returns
    -------
    (value, error) : tuple of float
        The estimate and the accumulated `quad` error bound.
    '''
    if not abs_tol > 0:
        raise NumericsError(f'abs_tol must be positive, got {abs_tol}')
    points = sorted(p for p in (points or []) if p > lower)
    span = float(initial_span)
    if points:
        span = max(span, 2.0 * (points[-1] - lower))

    def panel(a, b):
        options = {'points': [p for p in points if a < p < b] or None,
                   'epsabs': abs_tol / 10, 'epsrel': 1e-10}
        with warnings.catch_warnings():
            warnings.simplefilter('error', IntegrationWarning)
            try:
                return quad(f, a, b, limit=200, **options)
            except IntegrationWarning:
                pass
        # Retry with a larger subdivision limit; the final error check
        # decides whether the result is usable.
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', IntegrationWarning)
            return quad(f, a, b, limit=5000, **options)

    doublings = 0
    while abs(f(lower + span)) >= abs_tol / 100:
        span *= 2
        doublings += 1
        if doublings > max_doublings:
            raise ConvergenceError('integrand does not decay within '
                                   f'{max_doublings} doublings', None)

    upper = lower + span
    total, error = panel(lower, upper)
    quiet = 0
    while quiet < 2:
        new_upper = lower + 2 * (upper - lower)
        increment, inc_error = panel(upper, new_upper)
        total += increment
        error += inc_error
        upper = new_upper
        quiet = quiet + 1 if abs(increment) < abs_tol else 0
        doublings += 1
        if doublings > max_doublings:
            raise ConvergenceError('tail of the integral did not settle',
                                   total)
    if error > abs_tol:
        raise ConvergenceError(f'quadrature error bound {error:.3g} exceeds '
                               f'{abs_tol:.3g}', total)
    return total, error


##-------------------------------------------------------------------------
## RandomStream
##-------------------------------------------------------------------------
class RandomStream():
    '''A reproducible random stream keyed by (seed, stream_id).

    The generator is a PCG64 seeded from a `numpy.random.SeedSequence` with
    the stream id as spawn key, so the draws depend only on the pair and
    never on the order in which streams are created.

    Attributes
    ----------
    seed : int
        64 bit unsigned master seed.

    stream_id : int
        64 bit unsigned stream id; see `stream_id_for`.
    '''
    def __init__(self, seed, stream_id=0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream_id = int(stream_id) & 0xFFFFFFFFFFFFFFFF
        sequence = np.random.SeedSequence(entropy=self.seed,
                                          spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(sequence))


    @classmethod
    def for_state(cls, seed, trial, state):
        return cls(seed, stream_id_for(trial, state))


    def uniform(self, low, high, size=None):
        return self.generator.uniform(low, high, size=size)


    def normal(self, size=None):
        return self.generator.standard_normal(size=size)


    def complex_normal(self, size=None, variance=1.0):
        '''Circularly symmetric CN(0, variance): real and imaginary parts
        are independent N(0, variance/2).
        '''
        scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
        re = self.generator.standard_normal(size=size)
        im = self.generator.standard_normal(size=size)
        return scale * (re + 1j * im)


    def __repr__(self):
        return f'RandomStream(seed={self.seed}, stream_id={self.stream_id})'


def stream_id_for(trial, state):
    '''Pack (trial, state) into one 64 bit stream id: trial in the high
    32 bits, state in the low 32 bits.
    '''
    trial = int(trial)
    state = int(state)
    if trial < 0 or state < 0 or trial >= 2**32 or state >= 2**32:
        raise NumericsError(f'(trial, state) = ({trial}, {state}) does not '
                            f'fit a 64 bit stream id')
    return (trial << 32) | state
