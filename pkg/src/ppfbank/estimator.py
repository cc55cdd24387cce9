"""scikit-learn style front end for the filter bank."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_nonnegative_real, check_positive_int, check_spectra
from .coeffgen import (
    DEFAULT_BANDWIDTH,
    DEFAULT_BETA,
    FilterCoefficients,
    WindowSpec,
    generate_prototype,
)
from .dft import channelize_block
from .exceptions import ConfigError
from .fir import ppf_fir_optimized, ppf_fir_reference
from .pipeline import PpfConfig, StreamState, carry_history


class PolyphaseChannelizer(TransformerMixin, BaseEstimator):
    """Critically sampled polyphase filter bank.

    ``fit`` designs the prototype filter (the data are not used);
    ``transform`` channelizes a complete block of samples and
    ``partial_transform`` channelizes a stream block by block, carrying
    tap history between calls.

    Parameters
    ----------
    n_channels : int
        Number of output frequency channels.
    n_taps : int
        Taps per polyphase branch.
    beta : float
        Kaiser window shape parameter.
    window : {"kaiser", "rectangular"}
        ``"rectangular"`` ignores ``beta``.
    bandwidth : float
        Prototype passband width in channel widths.
    coefficients : FilterCoefficients, optional
        Use these weights instead of designing a prototype.
    workers : int
        Threads for the FIR and DFT stages.
    fft_fallback : bool
        Allow the direct DFT when ``n_channels`` is not a power of two.
    zero_prime : bool
        Start the stream with ``n_taps - 1`` spectra of zeros so every input
        spectrum yields an output spectrum.
    reference : bool
        Use the scalar reference FIR instead of the vectorized one.

    Attributes
    ----------
    coeffs_ : FilterCoefficients
    state_ : StreamState
        Streaming state used by :meth:`partial_transform`.

    Examples
    --------
    >>> import numpy as np
    >>> pfb = PolyphaseChannelizer(n_channels=4, n_taps=2).fit()
    >>> pfb.transform(np.ones(16, dtype=np.complex64)).shape
    (3, 4)
    """

    def __init__(
        self,
        n_channels=1024,
        n_taps=16,
        beta=DEFAULT_BETA,
        window="kaiser",
        bandwidth=DEFAULT_BANDWIDTH,
        coefficients=None,
        workers=1,
        fft_fallback=True,
        zero_prime=False,
        reference=False,
    ):
        self.n_channels = n_channels
        self.n_taps = n_taps
        self.beta = beta
        self.window = window
        self.bandwidth = bandwidth
        self.coefficients = coefficients
        self.workers = workers
        self.fft_fallback = fft_fallback
        self.zero_prime = zero_prime
        self.reference = reference

    @classmethod
    def from_config(cls, config, **kwargs):
        return cls(
            n_channels=config.n_channels,
            n_taps=config.n_taps,
            beta=config.window.beta,
            window=config.window.kind.value,
            bandwidth=config.bandwidth,
            workers=config.workers,
            fft_fallback=config.fft_fallback,
            zero_prime=config.zero_prime,
            **kwargs,
        )

    def fit(self, X=None, y=None):
        n_channels = check_positive_int(self.n_channels, "n_channels")
        n_taps = check_positive_int(self.n_taps, "n_taps")
        check_positive_int(self.workers, "workers")
        if self.coefficients is not None:
            coeffs = self.coefficients
            if not isinstance(coeffs, FilterCoefficients):
                raise ConfigError("coefficients must be FilterCoefficients")
            if (coeffs.n_channels, coeffs.n_taps) != (n_channels, n_taps):
                raise ConfigError(
                    f"coefficients are {coeffs.n_channels}x{coeffs.n_taps}, "
                    f"estimator is {n_channels}x{n_taps}"
                )
        else:
            window = WindowSpec(self.window, check_nonnegative_real(self.beta, "beta"))
            coeffs = generate_prototype(n_channels, n_taps, window, self.bandwidth)
        if X is not None:
            check_spectra(X, n_channels)
        self.coeffs_ = coeffs
        self.reset()
        return self

    def reset(self):
        """Forget any streamed history."""
        if self.zero_prime:
            self.state_ = StreamState.primed(self.n_channels, self.n_taps)
        else:
            self.state_ = StreamState(self.n_channels, self.n_taps)
        return self

    def _channelize(self, X):
        if self.reference:
            filtered = ppf_fir_reference(X, self.coeffs_)
        else:
            filtered = ppf_fir_optimized(X, self.coeffs_, self.workers)
        return channelize_block(filtered, self.fft_fallback, self.workers)

    def transform(self, X):
        """Channelize one self-contained block.

        Parameters
        ----------
        X : array_like of complex
            Flat samples (length a multiple of ``n_channels``) or a
            ``(n_spectra, n_channels)`` array with ``n_spectra >= n_taps``.

        Returns
        -------
        ndarray of complex64, shape (n_spectra - n_taps + 1, n_channels)
        """
        check_is_fitted(self, "coeffs_")
        X = check_spectra(X, self.n_channels)
        if self.zero_prime:
            pad = np.zeros((self.n_taps - 1, self.n_channels), dtype=np.complex64)
            X = np.concatenate((pad, X))
        return self._channelize(X)

    def partial_transform(self, X):
        """Channelize the next block of a stream.

        Output is what :meth:`transform` would give on the concatenation of
        every block seen since the last :meth:`fit` or :meth:`reset`, split at
        the same points.
        """
        check_is_fitted(self, "coeffs_")
        X = check_spectra(X, self.n_channels)
        state = self.state_
        state.spectra_in += len(X)
        fir_input = carry_history(state, X)
        if len(fir_input) < self.n_taps:
            return np.empty((0, self.n_channels), dtype=np.complex64)
        out = self._channelize(fir_input)
        state.spectra_processed += len(out)
        return out

    def to_config(self, **kwargs):
        return PpfConfig(
            n_channels=self.n_channels,
            n_taps=self.n_taps,
            window=WindowSpec(self.window, self.beta),
            bandwidth=self.bandwidth,
            workers=self.workers,
            fft_fallback=self.fft_fallback,
            zero_prime=self.zero_prime,
            **kwargs,
        )

    def _more_tags(self):
        return {"requires_y": False, "stateless": False, "X_types": ["2darray"]}
