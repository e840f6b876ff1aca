#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stego/bytes.hpp"
#include "stego/error.hpp"
#include "stego/wav.hpp"

// Power spectral density estimation: periodogram, Blackman-Tukey,
// Yule-Walker, modified covariance, and Capon (MVDR). All estimators share a
// normalized-frequency grid f_i = i/nfft for i = 0..nfft/2 (cycles/sample)
// and return nonnegative power. The steganalysis use case is locating a
// hidden tone such as cos(0.4*pi*n), i.e. normalized frequency 0.2.

namespace stego {

struct Signal {
    std::vector<double> samples;
};

// Audio samples scaled by 1/32768 into [-1, 1). Stereo uses one channel.
inline Signal signal_from_wav(const WavAudio& wav, std::uint16_t channel = 0) {
    if (channel >= wav.channels) throw UsageError("channel index out of range");
    Signal s;
    s.samples.reserve(wav.frame_count());
    for (std::size_t n = 0; n < wav.frame_count(); ++n)
        s.samples.push_back(static_cast<double>(wav.samples[n * wav.channels + channel]) /
                            32768.0);
    return s;
}

struct EstimatorConfig {
    std::size_t nfft = 1024;             // frequency grid size, power of two
    int order = 4;                       // AR / Capon model order p
    std::optional<std::size_t> bt_max_lag; // Blackman-Tukey lag M, default floor(N/5)

    std::size_t lag_for(std::size_t n) const {
        const std::size_t m = bt_max_lag.value_or(std::max<std::size_t>(1, n / 5));
        return m;
    }
};

struct SpectrumEstimate {
    std::vector<double> freqs;
    std::vector<double> power;
    std::string method;
    std::size_t clamped = 0; // Blackman-Tukey bins clamped to zero
};

namespace detail {

inline void check_signal(const Signal& x) {
    if (x.samples.size() < 2) throw UsageError("signal must have at least 2 samples");
    for (double v : x.samples)
        if (!std::isfinite(v)) throw NumericError("signal contains non-finite values");
}

inline void check_nfft(std::size_t nfft) {
    if (nfft < 2 || (nfft & (nfft - 1)) != 0)
        throw UsageError("nfft must be a power of two >= 2");
}

inline std::vector<double> grid(std::size_t nfft) {
    std::vector<double> f(nfft / 2 + 1);
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = static_cast<double>(i) / static_cast<double>(nfft);
    return f;
}

// Iterative radix-2 Cooley-Tukey, in place. Sizes are always powers of two.
inline void fft(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// AR transfer denominator |1 + sum a_k e^{-j 2 pi f k}|^2 evaluated on the
// grid, returned as the spectrum sigma2 / denom.
inline SpectrumEstimate ar_spectrum(const std::vector<double>& coeffs, double sigma2,
                                    std::size_t nfft, std::string method) {
    SpectrumEstimate est;
    est.method = std::move(method);
    est.freqs = grid(nfft);
    est.power.resize(est.freqs.size());
    const auto p = coeffs.size();
    for (std::size_t i = 0; i < est.freqs.size(); ++i) {
        std::complex<double> den(1.0, 0.0);
        for (std::size_t k = 1; k <= p; ++k) {
            const double ang = -2.0 * std::numbers::pi * est.freqs[i] * static_cast<double>(k);
            den += coeffs[k - 1] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        const double d = std::norm(den);
        est.power[i] = sigma2 / std::max(d, 1e-300);
    }
    return est;
}

// Symmetric positive-definite solve via Gaussian elimination with partial
// pivoting; reports a pivot-ratio condition estimate on failure.
inline std::vector<double> solve_spd(std::vector<std::vector<double>> m,
                                     std::vector<double> rhs, const char* context) {
    const std::size_t n = rhs.size();
    double max_pivot = 0.0, min_pivot = std::numeric_limits<double>::infinity();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
        std::swap(m[col], m[best]);
        std::swap(rhs[col], rhs[best]);
        const double pivot = m[col][col];
        max_pivot = std::max(max_pivot, std::abs(pivot));
        min_pivot = std::min(min_pivot, std::abs(pivot));
        if (!(std::abs(pivot) > max_pivot * 1e-13)) {
            std::ostringstream msg;
            msg << context << ": normal equations singular (pivot ratio ~ "
                << (min_pivot > 0 ? max_pivot / min_pivot
                                  : std::numeric_limits<double>::infinity())
                << ")";
            throw NumericError(msg.str());
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / pivot;
            for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= m[i][c] * x[c];
        x[i] = acc / m[i][i];
    }
    for (double v : x)
        if (!std::isfinite(v)) throw NumericError(std::string(context) + ": non-finite solution");
    return x;
}

} // namespace detail

// Biased autocorrelation estimate r(m) = (1/N) sum x(n) x(n+m). The biased
// form keeps the Toeplitz matrix positive semidefinite.
inline std::vector<double> autocorrelation(const Signal& x, std::size_t max_lag) {
    detail::check_signal(x);
    const std::size_t n = x.samples.size();
    if (max_lag >= n) throw UsageError("autocorrelation lag must be smaller than the signal");
    std::vector<double> r(max_lag + 1, 0.0);
    for (std::size_t m = 0; m <= max_lag; ++m) {
        double acc = 0.0;
        for (std::size_t i = 0; i + m < n; ++i) acc += x.samples[i] * x.samples[i + m];
        r[m] = acc / static_cast<double>(n);
    }
    return r;
}

// P(f) = |sum_n x(n) e^{-j 2 pi f n}|^2 / N on the nfft grid. Samples are
// folded modulo nfft first, which equals the literal sum at grid frequencies.
inline SpectrumEstimate periodogram(const Signal& x, const EstimatorConfig& cfg = {}) {
    detail::check_signal(x);
    detail::check_nfft(cfg.nfft);
    const std::size_t n = x.samples.size();

    std::vector<std::complex<double>> buf(cfg.nfft, 0.0);
    for (std::size_t i = 0; i < n; ++i) buf[i % cfg.nfft] += x.samples[i];
    detail::fft(buf);

    SpectrumEstimate est;
    est.method = "periodogram";
    est.freqs = detail::grid(cfg.nfft);
    est.power.resize(est.freqs.size());
    for (std::size_t i = 0; i < est.power.size(); ++i)
        est.power[i] = std::norm(buf[i]) / static_cast<double>(n);
    return est;
}

// Windowed autocorrelation transform with the Bartlett lag window
// w(m) = 1 - |m|/(M+1). Truncation can push bins slightly negative; those
// are clamped to zero and counted.
inline SpectrumEstimate blackman_tukey(const Signal& x, const EstimatorConfig& cfg = {}) {
    detail::check_signal(x);
    detail::check_nfft(cfg.nfft);
    const std::size_t n = x.samples.size();
    const std::size_t m = cfg.lag_for(n);
    if (m >= n) throw UsageError("Blackman-Tukey lag must be smaller than the signal");

    const std::vector<double> r = autocorrelation(x, m);
    SpectrumEstimate est;
    est.method = "blackman-tukey";
    est.freqs = detail::grid(cfg.nfft);
    est.power.resize(est.freqs.size());
    for (std::size_t i = 0; i < est.freqs.size(); ++i) {
        double acc = r[0];
        for (std::size_t lag = 1; lag <= m; ++lag) {
            const double w =
                1.0 - static_cast<double>(lag) / static_cast<double>(m + 1);
            acc += 2.0 * w * r[lag] *
                   std::cos(2.0 * std::numbers::pi * est.freqs[i] * static_cast<double>(lag));
        }
        if (acc < 0.0) {
            acc = 0.0;
            ++est.clamped;
        }
        est.power[i] = acc;
    }
    return est;
}

struct ArFit {
    std::vector<double> coeffs;     // a_1..a_p in 1 + sum a_k z^-k
    double noise_power = 0.0;       // driving-noise variance estimate
    std::vector<double> reflection; // Levinson reflection coefficients (Yule-Walker)
};

// Levinson-Durbin recursion on the biased autocorrelation.
inline ArFit fit_yule_walker(const Signal& x, int order) {
    detail::check_signal(x);
    if (order < 1 || static_cast<std::size_t>(2 * order) >= x.samples.size())
        throw UsageError("AR order must satisfy 1 <= p < N/2");
    const std::vector<double> r = autocorrelation(x, static_cast<std::size_t>(order));
    if (r[0] == 0.0) throw NumericError("degenerate signal: zero power");

    ArFit fit;
    fit.coeffs.assign(static_cast<std::size_t>(order), 0.0);
    double err = r[0];
    for (int m = 1; m <= order; ++m) {
        double acc = r[static_cast<std::size_t>(m)];
        for (int i = 1; i < m; ++i)
            acc += fit.coeffs[static_cast<std::size_t>(i - 1)] * r[static_cast<std::size_t>(m - i)];
        if (!(err > 0.0) || !std::isfinite(acc))
            throw NumericError("Levinson-Durbin recursion became degenerate");
        const double k = -acc / err;
        fit.reflection.push_back(k);
        for (int i = 1; i <= m / 2; ++i) {
            const double a_i = fit.coeffs[static_cast<std::size_t>(i - 1)];
            const double a_j = fit.coeffs[static_cast<std::size_t>(m - i - 1)];
            fit.coeffs[static_cast<std::size_t>(i - 1)] = a_i + k * a_j;
            if (i != m - i) fit.coeffs[static_cast<std::size_t>(m - i - 1)] = a_j + k * a_i;
        }
        fit.coeffs[static_cast<std::size_t>(m - 1)] = k;
        err *= (1.0 - k * k);
    }
    if (!std::isfinite(err) || err < 0.0)
        throw NumericError("Levinson-Durbin produced a negative error power");
    fit.noise_power = err;
    return fit;
}

inline SpectrumEstimate yule_walker(const Signal& x, const EstimatorConfig& cfg = {}) {
    detail::check_nfft(cfg.nfft);
    const ArFit fit = fit_yule_walker(x, cfg.order);
    return detail::ar_spectrum(fit.coeffs, fit.noise_power, cfg.nfft, "yule-walker");
}

// Least-squares AR fit over forward and backward prediction errors
// (windows n = p..N-1 in both directions). Exact for noiseless sinusoids.
inline ArFit fit_modified_covariance(const Signal& x, int order) {
    detail::check_signal(x);
    const std::size_t n = x.samples.size();
    const auto p = static_cast<std::size_t>(order);
    if (order < 1 || n <= 2 * p) throw UsageError("AR order must satisfy 1 <= p < N/2");

    double energy = 0.0;
    for (double v : x.samples) energy += v * v;
    if (energy == 0.0) throw NumericError("degenerate signal: zero power");

    // c(j,k) = forward + backward lag products, normalized by 2(N-p).
    std::vector<std::vector<double>> c(p + 1, std::vector<double>(p + 1, 0.0));
    const double norm = 2.0 * static_cast<double>(n - p);
    for (std::size_t j = 0; j <= p; ++j) {
        for (std::size_t k = j; k <= p; ++k) {
            double acc = 0.0;
            for (std::size_t i = p; i < n; ++i) acc += x.samples[i - j] * x.samples[i - k];
            for (std::size_t i = 0; i + p < n; ++i) acc += x.samples[i + j] * x.samples[i + k];
            c[j][k] = c[k][j] = acc / norm;
        }
    }

    std::vector<std::vector<double>> m(p, std::vector<double>(p));
    std::vector<double> rhs(p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < p; ++k) m[j][k] = c[j + 1][k + 1];
        rhs[j] = -c[j + 1][0];
    }

    ArFit fit;
    fit.coeffs = detail::solve_spd(std::move(m), std::move(rhs), "modified covariance");
    double rho = c[0][0];
    for (std::size_t k = 0; k < p; ++k) rho += fit.coeffs[k] * c[0][k + 1];
    fit.noise_power = std::max(rho, 0.0);
    return fit;
}

inline SpectrumEstimate modified_covariance(const Signal& x, const EstimatorConfig& cfg = {}) {
    detail::check_nfft(cfg.nfft);
    const ArFit fit = fit_modified_covariance(x, cfg.order);
    return detail::ar_spectrum(fit.coeffs, std::max(fit.noise_power, 1e-300), cfg.nfft,
                               "modified-covariance");
}

// Capon / minimum-variance: P(f) = (p+1) / (e(f)^H R^{-1} e(f)) with R the
// (p+1)x(p+1) Toeplitz autocorrelation matrix. Diagonal loading of 1e-8*r(0)
// is applied if R is not positive definite.
inline SpectrumEstimate capon(const Signal& x, const EstimatorConfig& cfg = {}) {
    detail::check_signal(x);
    detail::check_nfft(cfg.nfft);
    const auto p = static_cast<std::size_t>(cfg.order);
    if (cfg.order < 1 || x.samples.size() <= 2 * p)
        throw UsageError("Capon order must satisfy 1 <= p < N/2");
    const std::vector<double> r = autocorrelation(x, p);

    // Cholesky factor of the Toeplitz matrix; retry once with loading.
    const std::size_t dim = p + 1;
    auto cholesky = [&](double load, std::vector<std::vector<double>>& chol) {
        chol.assign(dim, std::vector<double>(dim, 0.0));
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double acc = r[i >= j ? i - j : j - i] + (i == j ? load : 0.0);
                for (std::size_t k = 0; k < j; ++k) acc -= chol[i][k] * chol[j][k];
                if (i == j) {
                    if (!(acc > 0.0)) return false;
                    chol[i][j] = std::sqrt(acc);
                } else {
                    chol[i][j] = acc / chol[j][j];
                }
            }
        }
        return true;
    };

    std::vector<std::vector<double>> chol;
    if (!cholesky(0.0, chol) && !cholesky(1e-8 * r[0], chol))
        throw NumericError("Capon autocorrelation matrix is singular");

    // R^{-1} from the factor, then collapse to diagonal sums g(d) so the
    // steering-vector quadratic form is a cosine series.
    std::vector<std::vector<double>> inv(dim, std::vector<double>(dim, 0.0));
    for (std::size_t col = 0; col < dim; ++col) {
        std::vector<double> e(dim, 0.0);
        e[col] = 1.0;
        std::vector<double> y(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            double acc = e[i];
            for (std::size_t k = 0; k < i; ++k) acc -= chol[i][k] * y[k];
            y[i] = acc / chol[i][i];
        }
        for (std::size_t i = dim; i-- > 0;) {
            double acc = y[i];
            for (std::size_t k = i + 1; k < dim; ++k) acc -= chol[k][i] * inv[k][col];
            inv[i][col] = acc / chol[i][i];
        }
    }
    std::vector<double> diag_sum(dim, 0.0);
    for (std::size_t d = 0; d < dim; ++d)
        for (std::size_t i = 0; i + d < dim; ++i) diag_sum[d] += inv[i][i + d];

    SpectrumEstimate est;
    est.method = "capon";
    est.freqs = detail::grid(cfg.nfft);
    est.power.resize(est.freqs.size());
    for (std::size_t i = 0; i < est.freqs.size(); ++i) {
        double den = diag_sum[0];
        for (std::size_t d = 1; d < dim; ++d)
            den += 2.0 * diag_sum[d] *
                   std::cos(2.0 * std::numbers::pi * est.freqs[i] * static_cast<double>(d));
        est.power[i] = static_cast<double>(dim) / std::max(den, 1e-300);
    }
    return est;
}

// Frequency readout: the highest interior local maximum over (0, 0.5], DC
// excluded; plateaus count, ties go to the lowest frequency. A spectrum with
// no local maximum (monotone slope) falls back to the plain argmax so the
// readout is total.
inline double peak_frequency(const SpectrumEstimate& s) {
    const std::size_t n = s.power.size();
    if (n < 2) throw UsageError("spectrum grid too small");
    double global_max = 0.0;
    for (double v : s.power) global_max = std::max(global_max, v);
    if (global_max <= 0.0) throw NumericError("all-zero spectrum has no peak");

    std::size_t best = 0;
    bool found = false;
    for (std::size_t i = 1; i < n; ++i) {
        const bool left_ok = s.power[i] >= s.power[i - 1];
        const bool right_ok = (i == n - 1) || (s.power[i] >= s.power[i + 1]);
        if (left_ok && right_ok && (!found || s.power[i] > s.power[best])) {
            best = i;
            found = true;
        }
    }
    if (!found) {
        best = 1;
        for (std::size_t i = 2; i < n; ++i)
            if (s.power[i] > s.power[best]) best = i;
    }
    return s.freqs[best];
}

// Deterministic Gaussian stream (Box-Muller over SplitMix64) so seeded
// Monte-Carlo runs are reproducible everywhere.
class GaussianNoise {
public:
    explicit GaussianNoise(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
        have_spare_ = true;
        return mag * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    double uniform() {
        return static_cast<double>(rng_.next() >> 11) * 0x1.0p-53; // [0, 1)
    }

    SplitMix64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

struct VarianceComparison {
    std::vector<double> freqs;
    std::vector<double> var_periodogram;
    std::vector<double> var_blackman_tukey;
    std::size_t bins_bt_lower = 0; // bins where BT variance < periodogram variance
};

// Monte-Carlo comparison of the periodogram and Blackman-Tukey estimators on
// white Gaussian noise. Trial t uses seed base_seed + t, so results do not
// depend on evaluation order.
inline VarianceComparison compare_estimator_variance(std::uint64_t base_seed, int trials,
                                                     std::size_t n, std::size_t lag,
                                                     std::size_t nfft) {
    if (trials < 2) throw UsageError("variance comparison needs at least 2 trials");
    EstimatorConfig cfg;
    cfg.nfft = nfft;
    cfg.bt_max_lag = lag;

    const std::size_t bins = nfft / 2 + 1;
    std::vector<double> sum_p(bins, 0.0), sumsq_p(bins, 0.0);
    std::vector<double> sum_b(bins, 0.0), sumsq_b(bins, 0.0);
    for (int t = 0; t < trials; ++t) {
        GaussianNoise noise(base_seed + static_cast<std::uint64_t>(t));
        Signal x;
        x.samples.resize(n);
        for (double& v : x.samples) v = noise.next();
        const SpectrumEstimate per = periodogram(x, cfg);
        const SpectrumEstimate bt = blackman_tukey(x, cfg);
        for (std::size_t i = 0; i < bins; ++i) {
            sum_p[i] += per.power[i];
            sumsq_p[i] += per.power[i] * per.power[i];
            sum_b[i] += bt.power[i];
            sumsq_b[i] += bt.power[i] * bt.power[i];
        }
    }

    VarianceComparison out;
    out.freqs = detail::grid(nfft);
    out.var_periodogram.resize(bins);
    out.var_blackman_tukey.resize(bins);
    const auto tn = static_cast<double>(trials);
    for (std::size_t i = 0; i < bins; ++i) {
        out.var_periodogram[i] = sumsq_p[i] / tn - (sum_p[i] / tn) * (sum_p[i] / tn);
        out.var_blackman_tukey[i] = sumsq_b[i] / tn - (sum_b[i] / tn) * (sum_b[i] / tn);
        if (out.var_blackman_tukey[i] < out.var_periodogram[i]) ++out.bins_bt_lower;
    }
    return out;
}

inline std::string spectrum_to_csv(const SpectrumEstimate& s) {
    std::ostringstream out;
    out << "freq,power\n";
    char line[80];
    for (std::size_t i = 0; i < s.freqs.size(); ++i) {
        std::snprintf(line, sizeof line, "%.10g,%.12g\n", s.freqs[i], s.power[i]);
        out << line;
    }
    return out.str();
}

inline std::string variance_to_csv(const VarianceComparison& v) {
    std::ostringstream out;
    out << "bin_freq,var_periodogram,var_blackman_tukey\n";
    char line[120];
    for (std::size_t i = 0; i < v.freqs.size(); ++i) {
        std::snprintf(line, sizeof line, "%.10g,%.12g,%.12g\n", v.freqs[i],
                      v.var_periodogram[i], v.var_blackman_tukey[i]);
        out << line;
    }
    return out.str();
}

} // namespace stego
