#include "qmdp/qtensor.hpp"

#include <fstream>
#include <map>

#include "qmdp/errors.hpp"
#include "qmdp/format.hpp"

namespace qmdp {

std::string bound_kind_name(bound_kind k) {
  switch (k) {
    case bound_kind::lower: return "lower";
    case bound_kind::upper: return "upper";
    case bound_kind::soft: return "soft";
    case bound_kind::time_free: return "time_free";
  }
  return "unknown";
}

bound_kind bound_kind_from_name(const std::string& name) {
  if (name == "lower") return bound_kind::lower;
  if (name == "upper") return bound_kind::upper;
  if (name == "soft") return bound_kind::soft;
  if (name == "time_free") return bound_kind::time_free;
  throw type_mismatch("bound kind " + name);
}

qtensor::qtensor(bound_kind kind, int horizon, int n_states, risk_grid grid,
                 int n_actions, double kappa)
    : kind_(kind), horizon_(horizon), n_states_(n_states),
      n_actions_(n_actions), grid_(grid), kappa_(kappa) {
  if (n_states_ < 1 || n_actions_ < 1 || horizon_ < 0) {
    throw param_out_of_range("qtensor shape");
  }
  if (time_free()) horizon_ = 0;
  int slices = time_free() ? 1 : horizon_ + 1;
  values_.assign(slice_size() * slices, 0.0);
}

bool qtensor::same_shape(const qtensor& other) const {
  return horizon_ == other.horizon_ && n_states_ == other.n_states_ &&
         n_actions_ == other.n_actions_ && grid_.J == other.grid_.J &&
         time_free() == other.time_free();
}

void qtensor::save(const std::string& csv_path,
                   const std::string& meta_path) const {
  std::ofstream meta(meta_path);
  if (!meta) throw io_error("cannot open " + meta_path);
  meta << "kind = " << bound_kind_name(kind_) << "\n"
       << "J = " << grid_.J << "\n"
       << "T = " << horizon_ << "\n"
       << "kappa = " << format_double(kappa_) << "\n"
       << "states = " << n_states_ << "\n"
       << "actions = " << n_actions_ << "\n";
  if (!meta) throw io_error("write failed: " + meta_path);

  std::ofstream csv(csv_path);
  if (!csv) throw io_error("cannot open " + csv_path);
  csv << "t,idstate,j,idaction,value\n";
  int slices = time_free() ? 1 : horizon_ + 1;
  for (int t = 0; t < slices; ++t) {
    for (int s = 0; s < n_states_; ++s) {
      for (int j = 0; j < grid_.J; ++j) {
        for (int a = 0; a < n_actions_; ++a) {
          csv << t << ',' << s << ',' << j << ',' << a << ','
              << format_double(at(t, s, j, a)) << '\n';
        }
      }
    }
  }
  if (!csv) throw io_error("write failed: " + csv_path);
}

qtensor qtensor::load(const std::string& csv_path,
                      const std::string& meta_path) {
  std::ifstream meta(meta_path);
  if (!meta) throw io_error("cannot open " + meta_path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(meta, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw type_mismatch("meta line: " + line);
    auto trim = [](std::string s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto need = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw missing_required("meta key " + key);
    return it->second;
  };
  long long J, T, S, A;
  double kappa;
  if (!parse_int(need("J"), J) || !parse_int(need("T"), T) ||
      !parse_int(need("states"), S) || !parse_int(need("actions"), A) ||
      !parse_double(need("kappa"), kappa)) {
    throw type_mismatch("meta values");
  }
  qtensor out(bound_kind_from_name(need("kind")), static_cast<int>(T),
              static_cast<int>(S), risk_grid(static_cast<int>(J)),
              static_cast<int>(A), kappa);

  std::ifstream csv(csv_path);
  if (!csv) throw io_error("cannot open " + csv_path);
  if (!std::getline(csv, line) ||
      (line != "t,idstate,j,idaction,value" &&
       line != "t,idstate,j,idaction,value\r")) {
    throw bad_header("qtensor csv header");
  }
  long long row_no = 1;
  while (std::getline(csv, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    long long t, s, j, a;
    double v;
    std::size_t pos = 0;
    auto next_field = [&](bool last) {
      auto comma = last ? line.size() : line.find(',', pos);
      if (comma == std::string::npos) {
        throw non_numeric_field("row " + std::to_string(row_no));
      }
      std::string f = line.substr(pos, comma - pos);
      pos = comma + 1;
      return f;
    };
    if (!parse_int(next_field(false), t) || !parse_int(next_field(false), s) ||
        !parse_int(next_field(false), j) || !parse_int(next_field(false), a) ||
        !parse_double(next_field(true), v)) {
      throw non_numeric_field("row " + std::to_string(row_no));
    }
    out.at(static_cast<int>(t), static_cast<int>(s), static_cast<int>(j),
           static_cast<int>(a)) = v;
  }
  return out;
}

}  // namespace qmdp
