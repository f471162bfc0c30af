#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "ebm/profile.hpp"
#include "ebm/quadrature.hpp"

namespace ebm {

enum class IntegralStatus { finite, divergent, indeterminate };
enum class Side { plus, minus };
enum class TailMode { declared, numeric };
enum class Verdict { RECURRENT, TRANSIENT_RIGHT, TRANSIENT_LEFT, INDETERMINATE };
enum class RecurrenceSufficiency { RECURRENT_SUFFICIENT, INCONCLUSIVE };

struct infinite_measure_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CriterionOptions {
    double x_max = 1e6;        // truncation point of the improper integrals
    double rel_tol = 1e-9;     // quadrature relative tolerance
    double band = 0.05;        // numeric mode: indeterminate slope band around -1
    double drift_tol = 0.005;  // numeric mode: max slope drift between fit windows
    TailMode tail_mode = TailMode::declared;
};

// One criterion integral int_0^inf x^moment exp(-+H(x)) dx.
struct CriterionResult {
    IntegralStatus status = IntegralStatus::indeterminate;
    double value = std::numeric_limits<double>::quiet_NaN();   // incl. tail; +inf when divergent
    double truncated_value = 0.0;   // quadrature over [0, x_max] only
    double tail_exponent = 0.0;     // integrand log-log slope near x_max
    double slope_drift = 0.0;       // numeric mode: |slope(far window) - slope(near window)|
    bool converged = true;
};

// H(x) = int_0^x h(l)/l dl, closed form per family (log_critical uses a frozen
// quadrature cache for its smooth remainder). Requires a homogeneous profile.
double big_h(const ExcitationProfile& p, double x);

CriterionResult criterion_integral(const ExcitationProfile& p, Side side, int moment,
                                   const CriterionOptions& opt = {});

struct SigmaResult {
    IntegralStatus status = IntegralStatus::indeterminate;
    double value = std::numeric_limits<double>::quiet_NaN();
};

// CLT constant sigma for the ballistic regime, side-resolving: profiles whose
// excitation points left are evaluated through their reflection. Finite iff the
// settled tail mass exceeds 4; divergent on (0, 4); indeterminate at the
// boundary and whenever the tail cannot be resolved.
SigmaResult sigma_constant(const ExcitationProfile& p, const CriterionOptions& opt = {});

struct ClassificationReport {
    std::string profile_id;
    CriterionResult c1_plus, c1_minus, c2_plus, c2_minus;
    Verdict verdict = Verdict::INDETERMINATE;
    double speed = 0.0;
    std::optional<double> pi_norm_c;   // 1/C1 on the transient side, when finite
    std::optional<double> pi_mean;     // mean of pi = 1/|speed| in the ballistic regime
    IntegralStatus sigma_status = IntegralStatus::indeterminate;
    double sigma = std::numeric_limits<double>::quiet_NaN();
    double x_max = 0.0;
    double rel_tol = 0.0;
};

ClassificationReport classify(const ExcitationProfile& p, const CriterionOptions& opt = {});

// unnormalized invariant density exp(-H(x)) of the dual diffusion
double invariant_density(const ExcitationProfile& p, double x);

// normalization c = 1/C1+; throws infinite_measure_error when C1+ diverges
double pi_normalization(const ExcitationProfile& p, const CriterionOptions& opt = {});

struct ScaleValue {
    double s = 0.0;
    double s_prime = 0.0;
};

// scale function of the dual diffusion: s'(x) = exp(H(x))/x, s(1) = 0
ScaleValue scale_function(const ExcitationProfile& p, double x, double rel_tol = 1e-9);

// Normalized invariant law pi(x) = c exp(-H(x)) on (0, inf) with a queryable
// cdf/quantile (closed-form tail beyond the settle point). Immutable, safe for
// concurrent reads.
class InvariantLaw {
  public:
    explicit InvariantLaw(ExcitationProfile p, const CriterionOptions& opt = {});

    double normalization() const { return c_; }
    std::optional<double> mean() const { return mean_; }
    double density(double x) const;
    double cdf(double x) const;
    double quantile(double u) const;

  private:
    double tail_mass(double x) const;

    ExcitationProfile p_;
    double c_ = 0.0;
    double x_hi_ = 0.0;
    double tail_e_ = 0.0;    // settled tail exponent of exp(-H)
    double tail_lc_ = 0.0;   // log coefficient at the integrability boundary
    bool tail_log_ = false;
    std::optional<double> mean_;
    std::shared_ptr<const CumulativeFunction> cum_;
};

// Sufficient recurrence test for nonnegative, possibly non-homogeneous profiles:
// checks whether the running average A(z) = (1/z) int_0^z delta^x dx stays below
// 1 - margin over the upper half of the grid.
RecurrenceSufficiency sufficient_recurrence_nonhomogeneous(const ExcitationProfile& p,
                                                           double z_max, int n_grid,
                                                           double margin = 0.02);

std::string report_csv_header();
std::string report_csv_row(const ClassificationReport& r);
std::string report_json(const ClassificationReport& r);

const char* to_string(Verdict v);
const char* to_string(IntegralStatus s);

}
