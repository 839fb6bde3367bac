#include "nbody/serialize.hpp"

#include <stdexcept>

namespace nbody::io {

namespace {

json matrixToJson(const Eigen::MatrixXd& mat) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < mat.cols(); ++j) row.push_back(mat(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrixFromJson(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument(std::string(what) + ": expected a non-empty array");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd mat(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::invalid_argument(std::string(what) + ": ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      mat(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return mat;
}

const json& require(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw std::invalid_argument(std::string("missing key: ") + key);
  }
  return *it;
}

}  // namespace

MassVector massesFromJson(const json& j) {
  const json& arr = require(j, "masses");
  if (!arr.is_array() || arr.empty()) {
    throw std::invalid_argument("masses: expected a non-empty array");
  }
  Eigen::VectorXd m(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) m[static_cast<Eigen::Index>(i)] = arr.at(i).get<double>();
  try {
    return MassVector(std::move(m));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("masses: ") + e.what());
  }
}

int dimFromJson(const json& j, int fallback) {
  if (const auto it = j.find("dim"); it != j.end()) return it->get<int>();
  return fallback;
}

json systemToJson(const MassVector& m, const Configuration& q) {
  json j;
  j["masses"] = json::array();
  for (int i = 0; i < m.size(); ++i) j["masses"].push_back(m[i]);
  j["dim"] = q.dim;
  j["positions"] = matrixToJson(q.points);
  return j;
}

std::pair<MassVector, Configuration> systemFromJson(const json& j) {
  MassVector m = massesFromJson(j);
  const int dim = dimFromJson(j, 2);
  Eigen::MatrixXd pts = matrixFromJson(require(j, "positions"), "positions");
  if (pts.rows() != m.size()) {
    throw std::invalid_argument("positions: row count must match masses");
  }
  return {std::move(m), Configuration(dim, std::move(pts))};
}

json toJson(const harmonics::TrigLoop& loop) {
  json j;
  j["masses"] = json::array();
  for (int i = 0; i < loop.masses().size(); ++i) {
    j["masses"].push_back(loop.masses()[i]);
  }
  j["dim"] = loop.dim();
  j["T"] = loop.period();
  j["a"] = matrixToJson(loop.cosVectors());
  j["b"] = matrixToJson(loop.sinVectors());
  return j;
}

harmonics::TrigLoop trigLoopFromJson(const json& j) {
  MassVector m = massesFromJson(j);
  const int dim = dimFromJson(j, 2);
  Eigen::MatrixXd a = matrixFromJson(require(j, "a"), "a");
  Eigen::MatrixXd b = matrixFromJson(require(j, "b"), "b");
  const double period = require(j, "T").get<double>();
  try {
    return harmonics::TrigLoop(std::move(m), dim, std::move(a), std::move(b),
                               period);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("trig loop: ") + e.what());
  }
}

json toJson(const variational::FourierLoop& loop) {
  json j;
  j["masses"] = json::array();
  for (int i = 0; i < loop.masses().size(); ++i) {
    j["masses"].push_back(loop.masses()[i]);
  }
  j["T"] = loop.period();
  j["order"] = loop.order();
  json cos_arr = json::array();
  json sin_arr = json::array();
  for (int i = 0; i < loop.bodies(); ++i) {
    json ci = json::array();
    json si = json::array();
    for (int h = 1; h <= loop.order(); ++h) {
      const Eigen::Vector2d a = loop.alpha(i, h);
      const Eigen::Vector2d b = loop.beta(i, h);
      ci.push_back(json::array({a.x(), a.y()}));
      si.push_back(json::array({b.x(), b.y()}));
    }
    cos_arr.push_back(std::move(ci));
    sin_arr.push_back(std::move(si));
  }
  j["cos"] = std::move(cos_arr);
  j["sin"] = std::move(sin_arr);
  return j;
}

variational::FourierLoop fourierLoopFromJson(const json& j) {
  MassVector m = massesFromJson(j);
  const double period = require(j, "T").get<double>();
  const int order = require(j, "order").get<int>();
  const json& cos_arr = require(j, "cos");
  const json& sin_arr = require(j, "sin");
  if (static_cast<int>(cos_arr.size()) != m.size() ||
      static_cast<int>(sin_arr.size()) != m.size()) {
    throw std::invalid_argument("fourier loop: coefficient body count mismatch");
  }
  if (order < 1) {
    throw std::invalid_argument("fourier loop: order must be at least 1");
  }
  Eigen::MatrixXd c(2 * m.size(), order);
  Eigen::MatrixXd s(2 * m.size(), order);
  for (int i = 0; i < m.size(); ++i) {
    const json& ci = cos_arr.at(static_cast<std::size_t>(i));
    const json& si = sin_arr.at(static_cast<std::size_t>(i));
    if (static_cast<int>(ci.size()) != order || static_cast<int>(si.size()) != order) {
      throw std::invalid_argument("fourier loop: harmonic count mismatch");
    }
    for (int h = 0; h < order; ++h) {
      c(2 * i, h) = ci.at(static_cast<std::size_t>(h)).at(0).get<double>();
      c(2 * i + 1, h) = ci.at(static_cast<std::size_t>(h)).at(1).get<double>();
      s(2 * i, h) = si.at(static_cast<std::size_t>(h)).at(0).get<double>();
      s(2 * i + 1, h) = si.at(static_cast<std::size_t>(h)).at(1).get<double>();
    }
  }
  return variational::FourierLoop(std::move(m), period, order, std::move(c),
                                  std::move(s));
}

json toJson(const central::CentralConfigResult& result) {
  json j;
  j["value"] = result.value;
  j["lambda"] = result.lambda;
  j["residual"] = result.residual;
  j["positions"] = matrixToJson(result.q.points);
  j["starts_used"] = result.starts_used;
  j["converged"] = result.converged;
  j["dim"] = result.q.dim;
  j["masses"] = json::array();
  for (int i = 0; i < result.masses.size(); ++i) {
    j["masses"].push_back(result.masses[i]);
  }
  return j;
}

json toJson(const variational::ActionReport& report) {
  return json{
      {"action", report.action},
      {"lower_bound", report.lower_bound},
      {"gap", report.gap},
      {"first_harmonic_fraction", report.first_harmonic_fraction},
      {"virial_gap", report.virial_gap},
      {"shape_gap", report.shape_gap},
      {"centroid_rms", report.centroid_rms},
      {"relative_equilibrium", report.relative_equilibrium},
  };
}

json toJson(const harmonics::RigidityReport& report) {
  return json{
      {"rigid", report.rigid},
      {"max_C", report.max_C},
      {"distances", report.distances},
  };
}

json toJson(const harmonics::RigidityCertificate& cert) {
  json pairs = json::array();
  for (const harmonics::PairEvidence& ev : cert.pairs) {
    pairs.push_back(json{
        {"j", ev.j},
        {"k", ev.k},
        {"theta", ev.theta},
        {"aligned_frac", ev.aligned_frac},
        {"cos_n_theta", ev.cos_n_theta},
        {"coefficient", ev.coefficient},
        {"coefficient_rel", ev.coefficient_rel},
    });
  }
  return json{
      {"certified", cert.certified},
      {"trivial", cert.trivial},
      {"harmonic", cert.harmonic},
      {"potential_variation", cert.potential_variation},
      {"alignment_sum", cert.alignment_sum},
      {"spectrum_magnitude", cert.spectrum_magnitude},
      {"max_coefficient_rel", cert.max_coefficient_rel},
      {"c_bound", cert.c_bound},
      {"pairs", std::move(pairs)},
      {"rigid", cert.rigid},
  };
}

}  // namespace nbody::io
