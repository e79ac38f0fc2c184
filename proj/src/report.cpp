#include "qps/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace qps {

using nlohmann::json;

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string num(const json& v) {
  if (v.is_null()) return "nan";
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return num(v.get<double>());
}

const json& section(const ResultRecord& r, const char* name) {
  if (!r.outputs.contains(name)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("record has no {} output", name));
  }
  return r.outputs.at(name);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + p.string());
  out << text;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

json ResultRecord::to_json() const {
  return {{"run_id", run_id}, {"config_hash", config_hash}, {"subcommand", subcommand}, {"outputs", outputs}};
}

ResultRecord ResultRecord::from_json(const json& j) {
  ResultRecord r;
  r.run_id = j.at("run_id").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.subcommand = j.at("subcommand").get<std::string>();
  r.outputs = j.at("outputs");
  return r;
}

void write_record(const ResultRecord& record, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "record.json", record.to_json().dump(1) + "\n");
  write_file(dir / "timings.json", json(record.timings).dump(1) + "\n");
}

ResultRecord read_record(const std::filesystem::path& dir) {
  ResultRecord r;
  try {
    r = ResultRecord::from_json(json::parse(slurp(dir / "record.json")));
    if (std::filesystem::exists(dir / "timings.json")) {
      r.timings = json::parse(slurp(dir / "timings.json")).get<std::map<std::string, double>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed record: ") + e.what());
  }
  return r;
}

const std::vector<std::string>& plot_kinds() {
  static const std::vector<std::string> kinds{"trajectory", "histogram", "field", "spectrum", "suitability"};
  return kinds;
}

std::vector<std::string> plot_columns(const std::string& kind, int dimension) {
  if (kind == "trajectory") return {"j", "R_j", "delta_j", "E_j", "dE", "dpsi", "simple", "residual"};
  if (kind == "histogram") return {"bin_lo", "bin_hi", "count", "fraction"};
  if (kind == "spectrum") return {"index", "eigenvalue", "diagonal"};
  std::vector<std::string> cols;
  if (kind == "field") {
    for (int j = 1; j <= dimension; ++j) cols.push_back(fmt::format("x{}", j));
    cols.insert(cols.end(), {"gamma", "in_mask", "grad_norm"});
    return cols;
  }
  if (kind == "suitability") {
    for (int j = 1; j <= dimension; ++j) cols.push_back(fmt::format("c{}", j));
    cols.insert(cols.end(), {"resolvent_norm", "resolvent_bound", "decay_ok", "pass"});
    return cols;
  }
  throw Error(ErrorKind::UnknownKind, "unknown plot kind '" + kind + "'");
}

bool has_plotdata(const ResultRecord& record, const std::string& kind) {
  (void)plot_columns(kind);
  if (kind == "trajectory") return record.outputs.contains("multiscale");
  if (kind == "histogram") return record.outputs.contains("ac_estimate");
  if (kind == "field") return record.outputs.contains("extension");
  if (kind == "spectrum") return record.outputs.contains("spectrum");
  return record.outputs.contains("suitability");
}

std::string plotdata_csv(const ResultRecord& record, const std::string& kind) {
  int dim = 1;
  if (kind == "field") dim = section(record, "extension").at("field").at("dimension").get<int>();
  if (kind == "suitability") dim = section(record, "suitability").at("dimension").get<int>();
  const auto cols = plot_columns(kind, dim);
  std::string out = fmt::format("{}\n", fmt::join(cols, ","));
  std::vector<std::string> row;
  const auto emit = [&] {
    out += fmt::format("{}\n", fmt::join(row, ","));
    row.clear();
  };
  if (kind == "trajectory") {
    for (const auto& l : section(record, "multiscale").at("levels")) {
      row = {num(l.at("level")), num(l.at("scale")), num(l.at("delta")), num(l.at("energy")),
             num(l.at("energy_diff")), num(l.at("vector_diff")), num(l.at("simple")), num(l.at("residual"))};
      emit();
    }
  } else if (kind == "histogram") {
    for (const auto& b : section(record, "ac_estimate").at("histogram")) {
      row = {num(b.at("lo")), num(b.at("hi")), num(b.at("count")), num(b.at("fraction"))};
      emit();
    }
  } else if (kind == "spectrum") {
    const auto& s = section(record, "spectrum");
    const auto& ev = s.at("eigenvalues");
    const auto& dg = s.at("diagonal");
    for (std::size_t i = 0; i < ev.size(); ++i) {
      row = {std::to_string(i), num(ev[i]), num(dg[i])};
      emit();
    }
  } else if (kind == "field") {
    const auto& f = section(record, "extension").at("field");
    const int res = f.at("resolution").get<int>();
    const auto& g = f.at("gamma");
    const auto& m = f.at("mask");
    const auto& gn = f.at("grad_norm");
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::size_t rest = i;
      std::vector<std::string> xs(static_cast<std::size_t>(dim));
      for (int j = dim - 1; j >= 0; --j) {
        xs[j] = num(static_cast<double>(rest % res) / res);
        rest /= res;
      }
      row = xs;
      row.insert(row.end(), {num(g[i]), num(m[i]), num(gn[i])});
      emit();
    }
  } else if (kind == "suitability") {
    for (const auto& b : section(record, "suitability").at("boxes")) {
      for (const auto& c : b.at("center")) row.push_back(num(c));
      row.insert(row.end(), {num(b.at("resolvent_norm")), num(b.at("resolvent_bound")), num(b.at("decay_ok")),
                             num(b.at("pass"))});
      emit();
    }
  }
  return out;
}

std::filesystem::path emit_plotdata(const ResultRecord& record, const std::string& kind,
                                    const std::filesystem::path& dir) {
  const std::string text = plotdata_csv(record, kind);
  std::filesystem::create_directories(dir);
  const auto path = dir / (kind + ".csv");
  write_file(path, text);
  return path;
}

}  // namespace qps
