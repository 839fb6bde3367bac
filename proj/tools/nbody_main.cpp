// Batch front end: central configurations, loop rigidity reports, direct
// action minimization, simultaneous-approximation scans and relative
// equilibrium construction, all with stable JSON/CSV file formats.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nbody/central_config.hpp"
#include "nbody/harmonics.hpp"
#include "nbody/kronecker.hpp"
#include "nbody/mechanics.hpp"
#include "nbody/serialize.hpp"
#include "nbody/variational.hpp"

namespace {

using nbody::io::json;

// Exit codes, disjoint across subcommands; 0 always means the mathematical
// predicate of the command held.
enum ExitCode : int {
  kOk = 0,
  kBadInput = 1,
  kNoConvergence = 2,
  kNotRigid = 3,
  kCollision = 4,
  kNoHit = 5,
};

struct Manifest {
  std::optional<std::string> input;
  std::optional<std::string> output;
  std::optional<unsigned long long> seed;
  std::optional<double> tol;
  std::optional<long long> k_max;
  std::optional<int> order;
  std::optional<double> period;
  std::optional<int> samples;
  std::optional<std::vector<double>> theta;
  std::optional<double> epsilon;
};

template <typename T>
void mergeKey(const json& j, const char* key, std::optional<T>& slot) {
  if (slot.has_value()) return;  // flags win over the manifest file
  if (const auto it = j.find(key); it != j.end()) slot = it->get<T>();
}

void mergeManifestFile(const std::string& path, Manifest& m) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open manifest: " + path);
  const json j = json::parse(in);
  mergeKey(j, "input", m.input);
  mergeKey(j, "output", m.output);
  mergeKey(j, "seed", m.seed);
  mergeKey(j, "tol", m.tol);
  mergeKey(j, "k_max", m.k_max);
  mergeKey(j, "order", m.order);
  mergeKey(j, "period", m.period);
  mergeKey(j, "samples", m.samples);
  mergeKey(j, "theta", m.theta);
  mergeKey(j, "epsilon", m.epsilon);
}

json loadInput(const Manifest& m) {
  if (!m.input.has_value()) {
    throw std::invalid_argument("--input is required for this command");
  }
  std::ifstream in(*m.input);
  if (!in) throw std::invalid_argument("cannot open input: " + *m.input);
  return json::parse(in);
}

void writeText(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << text;
}

// Primary JSON goes to <prefix>.<name>.json, or stdout without --output.
void emitJson(const Manifest& m, const std::string& name, json j,
              unsigned long long seed) {
  j["seed"] = seed;
  const std::string text = j.dump(2) + "\n";
  if (m.output.has_value()) {
    writeText(*m.output + "." + name + ".json", text);
  } else {
    std::cout << text;
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int cmdCentral(const Manifest& m) {
  const json input = loadInput(m);
  const nbody::MassVector masses = nbody::io::massesFromJson(input);
  if (masses.size() < 2) {
    throw std::invalid_argument("central: at least two masses required");
  }
  const int dim = nbody::io::dimFromJson(input, 2);
  nbody::central::MinimizeOptions opts;
  opts.seed = m.seed.value_or(0);
  if (m.tol.has_value()) opts.tol_central = *m.tol;
  const auto result = nbody::central::minimizeIU2(masses, dim, opts);
  emitJson(m, "central", nbody::io::toJson(result), opts.seed);
  return kOk;
}

int cmdSaariCheck(const Manifest& m) {
  const nbody::harmonics::TrigLoop loop =
      nbody::io::trigLoopFromJson(loadInput(m));
  const unsigned long long seed = m.seed.value_or(0);
  const double tol = m.tol.value_or(nbody::harmonics::kRigidityTol);
  const int samples = m.samples.value_or(nbody::harmonics::kDefaultSpectrumSamples);

  const auto rigidity = nbody::harmonics::rigidityCheck(loop, tol);
  const auto pairs = nbody::harmonics::pairHarmonics(loop);

  json report = nbody::io::toJson(rigidity);
  json pair_arr = json::array();
  for (const auto& ph : pairs) {
    pair_arr.push_back(json{{"j", ph.j}, {"k", ph.k}, {"A", ph.A},
                            {"B", ph.B}, {"C", ph.C}, {"theta", ph.theta}});
  }
  report["pairs"] = std::move(pair_arr);
  const std::vector<double> u = nbody::harmonics::samplePotential(loop, samples);
  const std::vector<double> inertia =
      nbody::harmonics::sampleMomentOfInertia(loop, samples);
  {
    double mean = 0.0;
    for (double x : u) mean += x;
    mean /= static_cast<double>(u.size());
    double sd = 0.0;
    for (double x : u) sd += (x - mean) * (x - mean);
    report["potential_variation"] =
        std::sqrt(sd / static_cast<double>(u.size())) / mean;
  }

  if (m.output.has_value()) {
    const int n_max = std::min(16, samples / 8);
    const auto spectrum =
        nbody::harmonics::potentialSpectrumQuadrature(loop, n_max, samples);
    std::string csv = "# seed=" + std::to_string(seed) + "\n";
    csv += "n,re,im,series_value,quadrature_value\n";
    for (int n = 0; n <= n_max; ++n) {
      // Series-side prediction: sum over pairs of the signed coefficient
      // (n = 0 rows use the mean-term series of the same family).
      std::complex<double> series{0.0, 0.0};
      if (n >= 1) {
        for (const auto& ph : pairs) {
          if (ph.C == 0.0) continue;
          const auto sc = nbody::harmonics::fourierCoefficientSeries(ph, n);
          const double sign = (n % 2 == 0) ? 1.0 : -1.0;
          series += sign * sc.value *
                    std::complex<double>(std::cos(n * ph.theta),
                                         std::sin(n * ph.theta));
        }
      } else {
        for (const auto& ph : pairs) {
          double partial = 1.0, term = 1.0;
          for (long long l = 0; l < 1'000'000; ++l) {
            term *= nbody::harmonics::seriesTermRatio(0, l) * ph.C * ph.C;
            partial += term;
            if (term < 1e-16 * partial) break;
          }
          series += ph.mass_product / std::sqrt(ph.A) * partial;
        }
      }
      const auto quad = spectrum[static_cast<std::size_t>(n)];
      csv += std::to_string(n) + "," + fmt(quad.real()) + "," + fmt(quad.imag()) +
             "," + fmt(std::abs(series)) + "," + fmt(std::abs(quad)) + "\n";
    }
    writeText(*m.output + ".spectrum.csv", csv);

    std::string series_csv = "# seed=" + std::to_string(seed) + "\n";
    series_csv += "t,U,I\n";
    const double dt = loop.period() / samples;
    for (int s = 0; s < samples; ++s) {
      series_csv += fmt((s + 0.5) * dt) + "," +
                    fmt(u[static_cast<std::size_t>(s)]) + "," +
                    fmt(inertia[static_cast<std::size_t>(s)]) + "\n";
    }
    writeText(*m.output + ".series.csv", series_csv);
  }
  emitJson(m, "rigidity", std::move(report), seed);
  return rigidity.rigid ? kOk : kNotRigid;
}

int cmdMinimizeAction(const Manifest& m) {
  const json input = loadInput(m);
  const nbody::MassVector masses = nbody::io::massesFromJson(input);
  if (masses.size() < 2) {
    throw std::invalid_argument("minimize-action: at least two masses required");
  }
  const double period = m.period.value_or(2.0 * M_PI);
  const int order = m.order.value_or(4);
  if (order < 1) throw std::invalid_argument("minimize-action: order must be >= 1");
  nbody::variational::ActionMinimizeOptions opts;
  opts.seed = m.seed.value_or(0);
  opts.samples = m.samples.value_or(1024);
  if (m.tol.has_value()) opts.tol_grad = *m.tol;

  const auto min = nbody::variational::minimizeAction(masses, period, order, opts);

  emitJson(m, "loop", nbody::io::toJson(min.loop), opts.seed);
  if (m.output.has_value()) {
    json report = nbody::io::toJson(min.report);
    report["iterations"] = min.iterations;
    report["restarts_used"] = min.restarts_used;
    report["reference"] = nbody::io::toJson(min.reference);
    report["seed"] = opts.seed;
    writeText(*m.output + ".report.json", report.dump(2) + "\n");

    std::string csv = "# seed=" + std::to_string(opts.seed) + "\n";
    csv += "t";
    for (int i = 0; i < masses.size(); ++i) {
      csv += ",x_" + std::to_string(i + 1) + ",y_" + std::to_string(i + 1);
    }
    csv += ",U,I,K\n";
    const int rows = 256;
    for (int s = 0; s < rows; ++s) {
      const double t = period * s / rows;
      const auto q = min.loop.configurationAt(t);
      const auto v = min.loop.velocityAt(t);
      csv += fmt(t);
      for (int i = 0; i < masses.size(); ++i) {
        csv += "," + fmt(q.points(i, 0)) + "," + fmt(q.points(i, 1));
      }
      csv += "," + fmt(nbody::potential(masses, q)) + "," +
             fmt(nbody::momentOfInertia(masses, q)) + "," +
             fmt(nbody::kineticEnergy(masses, v)) + "\n";
    }
    writeText(*m.output + ".trajectory.csv", csv);
  }
  return kOk;
}

int cmdKronecker(const Manifest& m) {
  if (!m.theta.has_value() || m.theta->empty()) {
    throw std::invalid_argument("kronecker: at least one --theta required");
  }
  nbody::kronecker::Query query;
  query.theta = *m.theta;
  query.epsilon = m.epsilon.value_or(0.01);
  query.k_max = m.k_max.value_or(1'000'000);
  const auto hits = nbody::kronecker::simultaneousApprox(query);

  const unsigned long long seed = m.seed.value_or(0);
  std::string csv = "# seed=" + std::to_string(seed) + "\n";
  csv += "k";
  for (std::size_t i = 0; i < query.theta.size(); ++i) {
    csv += ",dev_" + std::to_string(i + 1);
  }
  csv += "\n";
  for (const auto& h : hits) {
    csv += std::to_string(h.k);
    for (double d : h.deviations) csv += "," + fmt(d);
    csv += "\n";
  }
  if (m.output.has_value()) {
    writeText(*m.output + ".hits.csv", csv);
  } else {
    std::cout << csv;
  }
  return hits.empty() ? kNoHit : kOk;
}

int cmdRelEquilibrium(const Manifest& m) {
  const json input = loadInput(m);
  const nbody::MassVector masses = nbody::io::massesFromJson(input);
  if (masses.size() < 2) {
    throw std::invalid_argument("rel-equilibrium: at least two masses required");
  }
  const int dim = nbody::io::dimFromJson(input, 2);
  nbody::central::MinimizeOptions opts;
  opts.seed = m.seed.value_or(0);
  const auto central = nbody::central::minimizeIU2(masses, dim, opts);
  std::optional<double> period;
  if (m.period.has_value()) period = *m.period;
  const auto loop = nbody::variational::buildRelativeEquilibrium(central, period);
  if (m.output.has_value()) {
    json cj = nbody::io::toJson(central);
    cj["seed"] = opts.seed;
    writeText(*m.output + ".central.json", cj.dump(2) + "\n");
  }
  emitJson(m, "loop", nbody::io::toJson(loop), opts.seed);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"N-body variational toolkit"};
  app.require_subcommand(1);

  Manifest m;
  std::string manifest_path;

  const auto addCommon = [&](CLI::App* cmd) {
    cmd->add_option("--manifest", manifest_path,
                    "JSON manifest; explicit flags override its values");
    cmd->add_option("--input", m.input, "input JSON file");
    cmd->add_option("--output", m.output, "output path prefix");
    cmd->add_option("--seed", m.seed, "RNG seed (recorded in outputs)");
    cmd->add_option("--tol", m.tol, "tolerance override");
    cmd->add_option("--k-max", m.k_max, "search bound for integer scans");
    cmd->add_option("--order", m.order, "number of loop harmonics");
    cmd->add_option("--period", m.period, "loop period T");
    cmd->add_option("--samples", m.samples, "quadrature sample count");
    cmd->add_option("--theta", m.theta, "real numbers to approximate")
        ->delimiter(',');
    cmd->add_option("--epsilon", m.epsilon, "approximation window");
  };

  CLI::App* central = app.add_subcommand("central", "minimize I U^2");
  CLI::App* saari = app.add_subcommand(
      "saari-check", "rigidity analysis of a one-frequency loop");
  CLI::App* action = app.add_subcommand(
      "minimize-action", "direct action minimization over mean-zero loops");
  CLI::App* kron = app.add_subcommand(
      "kronecker", "simultaneous near-integer multiplier search");
  CLI::App* releq = app.add_subcommand(
      "rel-equilibrium", "build the rigidly rotating loop of a minimizer");
  for (CLI::App* cmd : {central, saari, action, kron, releq}) addCommon(cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!manifest_path.empty()) mergeManifestFile(manifest_path, m);
    if (central->parsed()) return cmdCentral(m);
    if (saari->parsed()) return cmdSaariCheck(m);
    if (action->parsed()) return cmdMinimizeAction(m);
    if (kron->parsed()) return cmdKronecker(m);
    if (releq->parsed()) return cmdRelEquilibrium(m);
  } catch (const nbody::CollisionError& e) {
    std::cerr << "collision: " << e.what() << "\n";
    return kCollision;
  } catch (const nbody::DegeneratePairError& e) {
    std::cerr << "degenerate pair: " << e.what() << "\n";
    return kCollision;
  } catch (const nbody::CollisionAbortError& e) {
    std::cerr << "collision abort: " << e.what() << "\n";
    return kCollision;
  } catch (const nbody::NoConvergenceError& e) {
    std::cerr << "no convergence: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const json::exception& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return kBadInput;
}
