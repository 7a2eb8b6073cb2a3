#include "simap/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "simap/io_util.hpp"

namespace simap {

using nlohmann::json;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAlphaEps = 1e-12;
}  // namespace

Standardizer standardize_fit(const Matrix& X) {
  const Eigen::Index n = X.rows();
  if (n < 2) throw std::invalid_argument("standardize_fit: need >= 2 rows");
  Standardizer st;
  st.mean = X.colwise().mean();
  st.stddev.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double ss = (X.col(j).array() - st.mean[j]).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    st.stddev[j] = sd > 0.0 ? sd : 1.0;
  }
  return st;
}

Matrix standardize_apply(const Standardizer& st, const Matrix& X) {
  Matrix out = X;
  out.rowwise() -= st.mean.transpose();
  out.array().rowwise() /= st.stddev.transpose().array();
  return out;
}

Matrix standardize_invert(const Standardizer& st, const Matrix& X) {
  Matrix out = X;
  out.array().rowwise() *= st.stddev.transpose().array();
  out.rowwise() += st.mean.transpose();
  return out;
}

double gaussian_kernel(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                       const Eigen::Ref<const Eigen::RowVectorXd>& v,
                       double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("gaussian_kernel: scale <= 0");
  return std::exp(-(u - v).squaredNorm() / (scale * scale));
}

namespace {

Matrix squared_distances(const Matrix& A, const Matrix& B) {
  const Vector a2 = A.rowwise().squaredNorm();
  const Vector b2 = B.rowwise().squaredNorm();
  Matrix D = -2.0 * A * B.transpose();
  D.colwise() += a2;
  D.rowwise() += b2.transpose();
  return D.cwiseMax(0.0);
}

Matrix kernel_from_sqdist(const Matrix& D, double scale) {
  return (-D / (scale * scale)).array().exp();
}

}  // namespace

SmoSolution smo_solve(const Matrix& gram, const std::vector<int>& y, double box,
                      const SmoConfig& cfg) {
  const int n = static_cast<int>(gram.rows());
  if (static_cast<int>(y.size()) != n) {
    throw std::invalid_argument("smo_solve: label count mismatch");
  }
  if (!(box > 0.0)) throw std::invalid_argument("smo_solve: C <= 0");

  SmoSolution sol;
  sol.alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);  // gradient of 1/2 a'Qa - e'a at a=0
  std::vector<double> yd(n);
  for (int i = 0; i < n; ++i) yd[i] = y[i];

  auto report_objective = [&]() {
    if (!cfg.on_objective) return;
    // dual (maximization) objective: sum(a) - 1/2 a'Qa = 1/2 (sum(a) - a'g)
    cfg.on_objective(0.5 * (sol.alpha.sum() - sol.alpha.dot(grad)));
  };

  long iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    // maximal violating pair
    double up_best = -kInf, low_best = kInf;
    int i = -1, j = -1;
    for (int p = 0; p < n; ++p) {
      const bool in_up = (y[p] > 0 && sol.alpha[p] < box - kAlphaEps) ||
                         (y[p] < 0 && sol.alpha[p] > kAlphaEps);
      const bool in_low = (y[p] > 0 && sol.alpha[p] > kAlphaEps) ||
                          (y[p] < 0 && sol.alpha[p] < box - kAlphaEps);
      const double score = -yd[p] * grad[p];
      if (in_up && score > up_best) {
        up_best = score;
        i = p;
      }
      if (in_low && score < low_best) {
        low_best = score;
        j = p;
      }
    }
    if (i < 0 || j < 0 || up_best - low_best <= cfg.kkt_tol) {
      sol.converged = true;
      break;
    }

    // two-variable subproblem along alpha_i += y_i t, alpha_j -= y_j t
    double eta = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
    if (eta <= 0.0) eta = 1e-12;
    double t = (up_best - low_best) / eta;

    double t_max = kInf, t_min = -kInf;
    if (y[i] > 0) {
      t_max = std::min(t_max, box - sol.alpha[i]);
      t_min = std::max(t_min, -sol.alpha[i]);
    } else {
      t_max = std::min(t_max, sol.alpha[i]);
      t_min = std::max(t_min, sol.alpha[i] - box);
    }
    if (y[j] > 0) {
      t_max = std::min(t_max, sol.alpha[j]);
      t_min = std::max(t_min, sol.alpha[j] - box);
    } else {
      t_max = std::min(t_max, box - sol.alpha[j]);
      t_min = std::max(t_min, -sol.alpha[j]);
    }
    t = std::clamp(t, t_min, t_max);

    sol.alpha[i] += yd[i] * t;
    sol.alpha[j] -= yd[j] * t;
    sol.alpha[i] = std::clamp(sol.alpha[i], 0.0, box);
    sol.alpha[j] = std::clamp(sol.alpha[j], 0.0, box);

    for (int p = 0; p < n; ++p) {
      grad[p] += yd[p] * t * (gram(p, i) - gram(p, j));
    }
    report_objective();
  }
  sol.iterations = iter;

  // bias from unbounded support vectors, midpoint of the KKT band otherwise
  double b_sum = 0.0;
  int b_count = 0;
  double up_best = -kInf, low_best = kInf;
  for (int p = 0; p < n; ++p) {
    const double score = -yd[p] * grad[p];
    const bool in_up = (y[p] > 0 && sol.alpha[p] < box - kAlphaEps) ||
                       (y[p] < 0 && sol.alpha[p] > kAlphaEps);
    const bool in_low = (y[p] > 0 && sol.alpha[p] > kAlphaEps) ||
                        (y[p] < 0 && sol.alpha[p] < box - kAlphaEps);
    if (in_up) up_best = std::max(up_best, score);
    if (in_low) low_best = std::min(low_best, score);
    if (sol.alpha[p] > kAlphaEps && sol.alpha[p] < box - kAlphaEps) {
      b_sum += score;
      ++b_count;
    }
  }
  if (b_count > 0) {
    sol.bias = b_sum / b_count;
  } else if (std::isfinite(up_best) && std::isfinite(low_best)) {
    sol.bias = 0.5 * (up_best + low_best);
  } else {
    sol.bias = 0.0;
  }
  return sol;
}

TrainedSvm smo_train(const Matrix& X, const std::vector<int>& y, double box,
                     double scale, const SmoConfig& cfg) {
  const int n = static_cast<int>(X.rows());
  if (static_cast<int>(y.size()) != n) {
    throw std::invalid_argument("smo_train: label count mismatch");
  }
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1) has_pos = true;
    else if (v == -1) has_neg = true;
    else throw std::invalid_argument("smo_train: labels must be -1/+1");
  }
  if (!has_pos || !has_neg) {
    throw std::invalid_argument("smo_train: both classes must be present");
  }
  if (!(scale > 0.0)) throw std::invalid_argument("smo_train: scale <= 0");

  TrainedSvm model;
  model.standardizer = standardize_fit(X);
  model.kernel_scale = scale;
  model.box_constraint = box;
  model.n_train = n;

  const Matrix Z = standardize_apply(model.standardizer, X);
  const Matrix gram = kernel_from_sqdist(squared_distances(Z, Z), scale);
  const SmoSolution sol = smo_solve(gram, y, box, cfg);
  model.converged = sol.converged;
  model.bias = sol.bias;

  std::vector<int> sv;
  for (int i = 0; i < n; ++i) {
    if (sol.alpha[i] > kAlphaEps) sv.push_back(i);
  }
  model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
  model.dual_coeffs.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    model.support_vectors.row(static_cast<Eigen::Index>(k)) = Z.row(sv[k]);
    model.dual_coeffs[static_cast<Eigen::Index>(k)] =
        sol.alpha[sv[k]] * y[sv[k]];
  }
  return model;
}

Prediction predict(const TrainedSvm& model, const Matrix& X) {
  if (X.rows() > 0 && X.cols() != model.support_vectors.cols()) {
    throw std::invalid_argument("predict: feature dimension mismatch");
  }
  Prediction pred;
  pred.decision.resize(X.rows());
  pred.labels.resize(static_cast<std::size_t>(X.rows()));
  if (X.rows() == 0) return pred;

  const Matrix Z = standardize_apply(model.standardizer, X);
  const Matrix D = squared_distances(Z, model.support_vectors);
  const Matrix K = kernel_from_sqdist(D, model.kernel_scale);
  pred.decision = K * model.dual_coeffs;
  pred.decision.array() += model.bias;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    pred.labels[static_cast<std::size_t>(i)] = pred.decision[i] < 0.0 ? -1 : 1;
  }
  return pred;
}

HyperGrid default_hyper_grid() {
  return {{0.01, 0.1, 1.0, 10.0, 100.0, 1000.0},
          {0.1, 0.3, 1.0, 3.0, 10.0, 30.0},
          10};
}

double median_pairwise_distance(const Matrix& X) {
  const Eigen::Index n = X.rows();
  if (n < 2) return 1.0;
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d.push_back((X.row(i) - X.row(j)).norm());
    }
  }
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  const double med = d[d.size() / 2];
  return med > 0.0 ? med : 1.0;
}

CvChoice cv_grid_search(const Matrix& X, const std::vector<int>& y,
                        const HyperGrid& grid, Rng& rng,
                        const SmoConfig& cfg) {
  const int n = static_cast<int>(X.rows());
  if (grid.c_values.empty() || grid.scale_factors.empty()) {
    throw std::invalid_argument("cv_grid_search: empty grid");
  }

  const Standardizer st_all = standardize_fit(X);
  const double med = median_pairwise_distance(standardize_apply(st_all, X));
  std::vector<double> scales;
  scales.reserve(grid.scale_factors.size());
  for (double f : grid.scale_factors) scales.push_back(f * med);

  std::vector<int> pos, neg;
  for (int i = 0; i < n; ++i) (y[i] > 0 ? pos : neg).push_back(i);
  const int min_class = static_cast<int>(std::min(pos.size(), neg.size()));
  const int folds = std::min(grid.folds, min_class);

  CvChoice choice{grid.c_values.front(), scales.front(), 1.0};
  if (folds < 2) {
    // degenerate split; fall back to the most regularized cell
    choice.scale = scales.back();
    return choice;
  }

  // stratified fold assignment, seeded by the caller's stream
  std::vector<int> fold_of(n);
  rng.shuffle(pos);
  rng.shuffle(neg);
  for (std::size_t k = 0; k < pos.size(); ++k) fold_of[pos[k]] = static_cast<int>(k) % folds;
  for (std::size_t k = 0; k < neg.size(); ++k) fold_of[neg[k]] = static_cast<int>(k) % folds;

  const std::size_t n_cells = grid.c_values.size() * scales.size();
  std::vector<long> misses(n_cells, 0);

  for (int f = 0; f < folds; ++f) {
    std::vector<int> tr, te;
    for (int i = 0; i < n; ++i) (fold_of[i] == f ? te : tr).push_back(i);

    Matrix Xtr(tr.size(), X.cols()), Xte(te.size(), X.cols());
    std::vector<int> ytr(tr.size()), yte(te.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
      Xtr.row(static_cast<Eigen::Index>(k)) = X.row(tr[k]);
      ytr[k] = y[tr[k]];
    }
    for (std::size_t k = 0; k < te.size(); ++k) {
      Xte.row(static_cast<Eigen::Index>(k)) = X.row(te[k]);
      yte[k] = y[te[k]];
    }

    const Standardizer st = standardize_fit(Xtr);
    const Matrix Ztr = standardize_apply(st, Xtr);
    const Matrix Zte = standardize_apply(st, Xte);
    const Matrix Dtr = squared_distances(Ztr, Ztr);
    const Matrix Dte = squared_distances(Zte, Ztr);

    std::size_t cell = 0;
    for (double c_val : grid.c_values) {
      for (double s_val : scales) {
        const Matrix gram = kernel_from_sqdist(Dtr, s_val);
        const SmoSolution sol = smo_solve(gram, ytr, c_val, cfg);
        Vector coef(Ztr.rows());
        for (Eigen::Index i = 0; i < coef.size(); ++i) {
          coef[i] = sol.alpha[i] * ytr[static_cast<std::size_t>(i)];
        }
        const Vector dec =
            (kernel_from_sqdist(Dte, s_val) * coef).array() + sol.bias;
        for (Eigen::Index i = 0; i < dec.size(); ++i) {
          const int lab = dec[i] < 0.0 ? -1 : 1;
          if (lab != yte[static_cast<std::size_t>(i)]) ++misses[cell];
        }
        ++cell;
      }
    }
  }

  // scan C ascending and scale descending with strict improvement, so ties
  // resolve toward smaller C, then larger scale
  double best_err = kInf;
  for (std::size_t ci = 0; ci < grid.c_values.size(); ++ci) {
    for (std::size_t si = scales.size(); si-- > 0;) {
      const double err =
          static_cast<double>(misses[ci * scales.size() + si]) / n;
      if (err < best_err) {
        best_err = err;
        choice.box = grid.c_values[ci];
        choice.scale = scales[si];
        choice.cv_error = err;
      }
    }
  }
  return choice;
}

EvalResult evaluate(const TrainedSvm& model, const Matrix& X,
                    const std::vector<int>& y) {
  if (X.rows() == 0) throw std::invalid_argument("evaluate: empty test set");
  const Prediction pred = predict(model, X);
  long misses = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (pred.labels[i] != y[i]) ++misses;
  }
  EvalResult res;
  res.generalization_error = static_cast<double>(misses) / X.rows();
  res.relative_sv_count =
      static_cast<double>(model.support_vectors.rows()) / model.n_train;
  return res;
}

// ---- serialization ----------------------------------------------------------

namespace {
constexpr const char* kSvmMagic = "# simap svm v1";

json vec_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vec_from_json(const json& j) {
  const auto vals = j.get<std::vector<double>>();
  Vector v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}
}  // namespace

void save_svm(const std::filesystem::path& path, const TrainedSvm& model) {
  json j;
  j["format"] = "simap.svm";
  j["version"] = 1;
  j["mean"] = vec_to_json(model.standardizer.mean);
  j["stddev"] = vec_to_json(model.standardizer.stddev);
  j["bias"] = model.bias;
  j["kernel_scale"] = model.kernel_scale;
  j["box_constraint"] = model.box_constraint;
  j["converged"] = model.converged;
  j["n_train"] = model.n_train;
  j["dual_coeffs"] = vec_to_json(model.dual_coeffs);
  json sv = json::array();
  for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i) {
    sv.push_back(vec_to_json(model.support_vectors.row(i).transpose()));
  }
  j["support_vectors"] = sv;
  atomic_write(path, std::string(kSvmMagic) + "\n" + j.dump(2) + "\n");
}

TrainedSvm load_svm(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto nl = text.find('\n');
  if (nl == std::string::npos || text.substr(0, nl) != kSvmMagic) {
    throw ParseError("missing svm magic header", 1);
  }
  json j = json::parse(text.substr(nl + 1), nullptr, false);
  if (j.is_discarded() || j.value("format", "") != "simap.svm") {
    throw ParseError("bad svm JSON payload", 2);
  }
  TrainedSvm model;
  model.standardizer.mean = vec_from_json(j.at("mean"));
  model.standardizer.stddev = vec_from_json(j.at("stddev"));
  model.bias = j.at("bias").get<double>();
  model.kernel_scale = j.at("kernel_scale").get<double>();
  model.box_constraint = j.at("box_constraint").get<double>();
  model.converged = j.at("converged").get<bool>();
  model.n_train = j.at("n_train").get<int>();
  model.dual_coeffs = vec_from_json(j.at("dual_coeffs"));
  const auto& sv = j.at("support_vectors");
  const Eigen::Index rows = static_cast<Eigen::Index>(sv.size());
  const Eigen::Index cols = model.standardizer.mean.size();
  model.support_vectors.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    model.support_vectors.row(i) =
        vec_from_json(sv[static_cast<std::size_t>(i)]).transpose();
  }
  return model;
}

}  // namespace simap
