#pragma once

#include <array>

// Ground-truth class configurations, ROIs, time grids and noise settings for
// the five registered systems. Every numeric constant used by the model zoo
// and the experiment harness lives here.

namespace simap::constants {

// ---- toy: xdot = -a b x, x(0) = 1, t in [0, 1] -----------------------------
inline constexpr double kToyRoi[2][2] = {{0.1, 3.0}, {0.1, 3.0}};
inline constexpr double kToyMean0[2] = {1.0, 1.0};
inline constexpr double kToyMean1[2] = {0.9, 0.9};
inline constexpr double kToyVar = 1e-4;  // covariance 1e-4 * I2
inline constexpr int kToyTrain = 100, kToyTest = 200;
inline constexpr double kToyGridStart = 0.0, kToyGridStep = 0.1, kToyGridEnd = 1.0;
inline constexpr double kToyNoiseFoVar = 0.01;  // sigma = 0.1
inline constexpr double kToyNoisePoVar = 0.01;
inline constexpr double kToySigmaRange[7] = {0.01, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
inline constexpr double kToyExp3Sigma = 0.1;

// ---- catenary chains (ccm2 / ccm4) and the loop model (cml) ---------------
// Shared prednisone-style input into compartment 1 (configurable defaults):
// u(t) = S0 * k_abs * exp(-k_abs t).
inline constexpr double kDefaultInputS0 = 100.0;
inline constexpr double kDefaultInputKabs = 0.05;

inline constexpr double kCcmRoiMin = 0.0, kCcmRoiMax = 0.1;
inline constexpr double kCcmGridStart = 0.0, kCcmGridStep = 10.0, kCcmGridEnd = 240.0;
inline constexpr double kCcmNoiseVar = 100.0;  // sigma = 10 per observed channel
inline constexpr double kCcmSigmaRange[6] = {10, 20, 30, 40, 50, 60};
inline constexpr double kCcmExp3Sigma = 10.0;
inline constexpr double kCompartmentalCovVar = 1e-7;  // 1e-7 * I_n

// ccm2: theta = (k01, k02, k12, k21)
inline constexpr int kCcm2Train = 100, kCcm2Test = 200;
inline constexpr double kCcm2Mean0[4] = {0.015, 0.015, 0.074, 0.01};
inline constexpr double kCcm2Mean1[4] = {0.015, 0.015, 0.059, 0.008};

// ccm4: theta = (k01, k02, k03, k04, k12, k23, k34, k21, k32, k43).
// Class 0 extends the ccm2 link to every link of the chain (0.074 toward
// compartment 1, 0.01 away from it); class 1 halves all six conversions.
inline constexpr int kCcm4Train = 800, kCcm4Test = 1000;
inline constexpr double kCcm4Leak = 0.015;
inline constexpr double kCcm4Mean0[10] = {0.015, 0.015, 0.015, 0.015,
                                          0.074, 0.074, 0.074,
                                          0.01,  0.01,  0.01};
inline constexpr double kCcm4Mean1[10] = {0.015, 0.015, 0.015, 0.015,
                                          0.037, 0.037, 0.037,
                                          0.005, 0.005, 0.005};

// cml: theta = (k01, k02, k03, k04, k12, k21, k23, k42, k34, k43).
// Conversion values taken positionally from the ccm4 table row, with the
// chain's k32 slot feeding the loop rate k42.
inline constexpr int kCmlTrain = 800, kCmlTest = 1000;
inline constexpr double kCmlMean0[10] = {0.015, 0.015, 0.015, 0.015,
                                         0.074, 0.01, 0.01, 0.074, 0.074, 0.01};
inline constexpr double kCmlMean1[10] = {0.015, 0.015, 0.015, 0.015,
                                         0.037, 0.005, 0.005, 0.037, 0.037, 0.005};

// ---- batch reactor: theta = (b1, b2, mu_m, Ks, Y, Kd), t in [0, 12] -------
inline constexpr int kBrTrain = 200, kBrTest = 400;
inline constexpr double kBrRoi[6][2] = {{0, 10}, {0, 50}, {0, 1},
                                        {0, 5},  {0, 1},  {0, 1}};
inline constexpr double kBrMean0[6] = {1.25, 30, 0.5, 3, 0.6, 0.05};
inline constexpr double kBrMean1[6] = {1.25, 30, 0.5, 3, 0.48, 0.05};
// covariance diag(1e-2 * v), v = (1, 100, 1e-2, 1, 1e-2, 1e-4)
inline constexpr double kBrCovDiag[6] = {1e-2, 1.0, 1e-4, 1e-2, 1e-4, 1e-6};
inline constexpr double kBrGridStart = 0.0, kBrGridStep = 1.0, kBrGridEnd = 12.0;
inline constexpr double kBrNoiseVar = 1.0;  // sigma = 1
inline constexpr double kBrSigmaRange[6] = {0.1, 1, 2, 3, 4, 5};
inline constexpr double kBrExp3Sigma = 1.0;

// ---- shared experiment settings --------------------------------------------
inline constexpr double kSparseFraction = 0.4;
inline constexpr int kExp1Trials = 20;
inline constexpr int kExp2Trials = 10;
inline constexpr int kExp3Trials = 20;
inline constexpr int kExp2TrainPerClass = 10;
inline constexpr std::array<int, 6> kTrainSizeLadder = {10, 20, 50, 100, 200, 400};

}  // namespace simap::constants
