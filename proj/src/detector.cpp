#include "ssdf/detector.hpp"

#include "ssdf/common.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>

namespace ssdf {

double qfunc(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double qfunc_inv(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("qfunc_inv: probability must lie in (0,1)");
    return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double mf_statistic(const Eigen::VectorXd& received, const Eigen::VectorXd& pilot)
{
    if (received.size() != pilot.size())
        throw DimensionError("mf_statistic: received and pilot lengths differ");
    return received.dot(pilot);
}

static double spread(const DetectorParams& p)
{
    if (!(p.noise_variance > 0.0))
        throw DomainError("detector: noise variance must be positive");
    if (!(p.signal_energy > 0.0))
        throw DomainError("detector: signal energy must be positive");
    return std::sqrt(p.signal_energy * p.noise_variance);
}

double prob_detection(double threshold, const DetectorParams& params)
{
    return qfunc((threshold - params.signal_energy) / spread(params));
}

double prob_false_alarm(double threshold, const DetectorParams& params)
{
    return qfunc(threshold / spread(params));
}

double threshold_for(double target, const DetectorParams& params, Anchor anchor)
{
    if (!(target > 0.0 && target < 1.0))
        throw DomainError("threshold_for: target must lie in (0,1)");
    double s = spread(params);
    double t = qfunc_inv(target) * s;
    return anchor == Anchor::FromPf ? t : params.signal_energy + t;
}

double roc_point(double pf, double snr, PUModel model)
{
    if (!(pf > 0.0 && pf < 1.0))
        throw DomainError("roc_point: pf must lie in (0,1)");
    if (!(snr >= 0.0))
        throw DomainError("roc_point: snr must be nonnegative");
    if (snr == 0.0)
        return pf;
    if (model == PUModel::Nonfluctuating)
        return qfunc(qfunc_inv(pf) - std::sqrt(snr));
    return std::pow(pf, 1.0 / (1.0 + snr));
}

double effective_snr(double tx_power, double defense, double attack, double gain, double noise_power)
{
    double den = noise_power + attack;
    if (den == 0.0)
        throw DomainError("effective_snr: zero denominator");
    return gain * (tx_power + defense) / den;
}

std::vector<CurvePoint> roc_curve(double snr, const std::vector<double>& pf_grid)
{
    std::vector<CurvePoint> out;
    out.reserve(pf_grid.size());
    for (double pf : pf_grid)
        out.push_back({pf, roc_point(pf, snr, PUModel::Nonfluctuating),
                       roc_point(pf, snr, PUModel::FluctuatingRayleigh)});
    return out;
}

std::vector<CurvePoint> pd_vs_snr(double pf, const std::vector<double>& snr_db_grid)
{
    std::vector<CurvePoint> out;
    out.reserve(snr_db_grid.size());
    for (double db : snr_db_grid) {
        double g = db_to_linear(db);
        out.push_back({db, roc_point(pf, g, PUModel::Nonfluctuating),
                       roc_point(pf, g, PUModel::FluctuatingRayleigh)});
    }
    return out;
}

std::vector<double> linspace(double lo, double hi, int n)
{
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

} // namespace ssdf
