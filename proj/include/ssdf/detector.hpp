#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ssdf {

struct DetectorParams {
    double signal_energy = 1.0;   // E
    double noise_variance = 1.0;  // sigma^2
    int samples = 1;
    Eigen::VectorXd pilot;
};

enum class PUModel { Nonfluctuating, FluctuatingRayleigh };
enum class Anchor { FromPf, FromPd };

// Standard normal tail and its inverse.
double qfunc(double z);
double qfunc_inv(double p);

double mf_statistic(const Eigen::VectorXd& received, const Eigen::VectorXd& pilot);

double prob_detection(double threshold, const DetectorParams& params);
double prob_false_alarm(double threshold, const DetectorParams& params);
double threshold_for(double target, const DetectorParams& params, Anchor anchor);

double roc_point(double pf, double snr, PUModel model);

double effective_snr(double tx_power, double defense, double attack, double gain, double noise_power);

struct CurvePoint {
    double x;
    double pd_nonfluct;
    double pd_fluct;
};

// pf grid at fixed snr (linear), and snr_db grid at fixed pf.
std::vector<CurvePoint> roc_curve(double snr, const std::vector<double>& pf_grid);
std::vector<CurvePoint> pd_vs_snr(double pf, const std::vector<double>& snr_db_grid);

std::vector<double> linspace(double lo, double hi, int n);

} // namespace ssdf
