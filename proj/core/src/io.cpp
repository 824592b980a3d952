#include "occld/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace occld {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Eigen::VectorXd vector_field(const json& j, const char* key, int expect = -1) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw ValidationError(std::string("missing array field \"") + key + "\"");
  }
  const auto& arr = j[key];
  Eigen::VectorXd v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      throw ValidationError(std::string("field \"") + key +
                            "\" has a non-numeric entry");
    }
    v[static_cast<int>(i)] = arr[i].get<double>();
  }
  if (expect >= 0 && v.size() != expect) {
    throw ValidationError(std::string("field \"") + key +
                          "\" has the wrong length");
  }
  return v;
}

int resolve_state(const json& j, const ChainModel& model) {
  const std::string label = j.get<std::string>();
  const int idx = model.state_index(label);
  if (idx < 0) throw ValidationError("unknown state label \"" + label + "\"");
  return idx;
}

ProbMeasure measure_from_json(const json& j, const ChainModel& model) {
  if (j.contains("delta")) {
    return ProbMeasure::delta(resolve_state(j["delta"], model), model.size());
  }
  if (j.contains("mu")) {
    return ProbMeasure::from_vector(vector_field(j, "mu", model.size()));
  }
  throw ValidationError("measure needs either \"mu\" or \"delta\"");
}

EventSpec event_from_json(const json& j, const ChainModel& model) {
  if (!j.contains("type") || !j["type"].is_string()) {
    throw ValidationError("event needs a \"type\"");
  }
  const std::string type = j["type"].get<std::string>();
  if (type == "set_threshold") {
    if (!j.contains("target") || !j["target"].is_array()) {
      throw ValidationError("set_threshold event needs a \"target\" array");
    }
    std::vector<int> idx;
    for (const auto& lbl : j["target"]) idx.push_back(resolve_state(lbl, model));
    if (!j.contains("threshold") || !j["threshold"].is_number()) {
      throw ValidationError("set_threshold event needs a numeric threshold");
    }
    return EventSpec::set_threshold(StateSet::from_indices(idx, model.size()),
                                    j["threshold"].get<double>());
  }
  if (type == "neighborhood") {
    if (!j.contains("test_functions") || !j["test_functions"].is_array() ||
        j["test_functions"].empty()) {
      throw ValidationError("neighborhood event needs test_functions");
    }
    std::vector<Eigen::VectorXd> fns;
    for (const auto& f : j["test_functions"]) {
      Eigen::VectorXd v(f.size());
      for (size_t i = 0; i < f.size(); ++i) {
        v[static_cast<int>(i)] = f[i].get<double>();
      }
      if (v.size() != model.size()) {
        throw ValidationError("test function length mismatch");
      }
      fns.push_back(std::move(v));
    }
    if (!j.contains("center")) {
      throw ValidationError("neighborhood event needs a center measure");
    }
    if (!j.contains("epsilon") || !j["epsilon"].is_number()) {
      throw ValidationError("neighborhood event needs a numeric epsilon");
    }
    return EventSpec::neighborhood(
        TauNeighborhood::make(std::move(fns), measure_from_json(j["center"], model),
                              j["epsilon"].get<double>()));
  }
  throw ValidationError("unknown event type \"" + type + "\"");
}

}  // namespace

ChainModel parse_model(const std::string& json_text) {
  const json j = parse_json(json_text, "model file");
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw ValidationError("model needs a \"kind\"");
  }
  const std::string kind_str = j["kind"].get<std::string>();
  Kind kind;
  if (kind_str == "discrete") {
    kind = Kind::Discrete;
  } else if (kind_str == "continuous") {
    kind = Kind::Continuous;
  } else {
    throw ValidationError("kind must be \"discrete\" or \"continuous\"");
  }

  if (!j.contains("matrix") || !j["matrix"].is_array()) {
    throw ValidationError("model needs a \"matrix\"");
  }
  const auto& rows = j["matrix"];
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd matrix(n, n);
  for (int i = 0; i < n; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n) {
      throw ValidationError("matrix row " + std::to_string(i) +
                            " is not length " + std::to_string(n));
    }
    for (int jj = 0; jj < n; ++jj) {
      matrix(i, jj) = rows[i][jj].get<double>();
    }
  }

  std::vector<std::string> labels;
  if (j.contains("states")) {
    for (const auto& s : j["states"]) labels.push_back(s.get<std::string>());
  }

  return build_model(kind, matrix, vector_field(j, "m", n), std::move(labels));
}

ChainModel load_model(const std::filesystem::path& path) {
  return parse_model(slurp(path));
}

std::string model_to_json(const ChainModel& model) {
  json j;
  j["kind"] = kind_name(model.kind);
  j["states"] = model.states;
  json rows = json::array();
  for (int i = 0; i < model.size(); ++i) {
    json row = json::array();
    for (int jj = 0; jj < model.size(); ++jj) row.push_back(model.kernel(i, jj));
    rows.push_back(std::move(row));
  }
  j["matrix"] = std::move(rows);
  j["m"] = std::vector<double>(model.m.data(), model.m.data() + model.size());
  return j.dump(2);
}

ProbMeasure parse_measure(const std::string& json_text,
                          const ChainModel& model) {
  return measure_from_json(parse_json(json_text, "measure file"), model);
}

ProbMeasure load_measure(const std::filesystem::path& path,
                         const ChainModel& model) {
  return parse_measure(slurp(path), model);
}

Experiment load_experiment(const std::filesystem::path& path) {
  const json j = parse_json(slurp(path), "experiment file");

  Experiment exp;
  if (!j.contains("model") || !j["model"].is_string()) {
    throw ValidationError("experiment needs a \"model\" path");
  }
  exp.model_path = path.parent_path() / j["model"].get<std::string>();
  exp.model = load_model(exp.model_path);

  if (j.contains("starts")) {
    for (const auto& lbl : j["starts"]) {
      exp.starts.push_back(resolve_state(lbl, exp.model));
    }
  } else {
    for (int i = 0; i < exp.model.size(); ++i) exp.starts.push_back(i);
  }

  if (!j.contains("event")) throw ValidationError("experiment needs an event");
  exp.event = event_from_json(j["event"], exp.model);

  if (!j.contains("n_grid") || !j["n_grid"].is_array() || j["n_grid"].empty()) {
    throw ValidationError("experiment needs a nonempty n_grid");
  }
  for (const auto& v : j["n_grid"]) exp.n_grid.push_back(v.get<double>());

  if (j.contains("trials")) exp.trials = j["trials"].get<std::uint64_t>();
  if (j.contains("seed")) exp.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("tolerance_fraction")) {
    exp.tol_fraction = j["tolerance_fraction"].get<double>();
  }
  return exp;
}

std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace occld
