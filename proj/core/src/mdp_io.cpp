#include "qmdp/mdp_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>
#include <vector>

#include "qmdp/errors.hpp"
#include "qmdp/format.hpp"

namespace qmdp {

namespace {

constexpr const char* kHeader = "idstatefrom,idaction,idstateto,probability,reward";

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

mdp load_mdp_csv(std::istream& in, double gamma) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kHeader) {
    throw bad_header("expected `" + std::string(kHeader) + "`");
  }

  std::map<std::tuple<int, int, int>, std::pair<double, double>> merged;
  int max_state = -1;
  int max_action = -1;
  long long row_no = 1;
  std::vector<std::vector<bool>> has_rows;  // grown lazily below

  while (std::getline(in, line)) {
    ++row_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 5) {
      throw non_numeric_field("row " + std::to_string(row_no) +
                              ": expected 5 fields");
    }
    long long s, a, s2;
    double p, r;
    if (!parse_int(fields[0], s) || !parse_int(fields[1], a) ||
        !parse_int(fields[2], s2) || !parse_double(fields[3], p) ||
        !parse_double(fields[4], r)) {
      throw non_numeric_field("row " + std::to_string(row_no));
    }
    if (s < 0 || a < 0 || s2 < 0) {
      throw non_numeric_field("row " + std::to_string(row_no) +
                              ": negative index");
    }
    if (!std::isfinite(p) || !std::isfinite(r)) {
      throw non_numeric_field("row " + std::to_string(row_no) +
                              ": non-finite value");
    }
    if (p < 0.0) {
      throw row_probability_negative("row " + std::to_string(row_no));
    }
    max_state = std::max<long long>(max_state, std::max(s, s2));
    max_action = std::max<long long>(max_action, a);

    auto key = std::make_tuple(static_cast<int>(s), static_cast<int>(a),
                               static_cast<int>(s2));
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(key, std::make_pair(p, r));
    } else {
      if (std::abs(it->second.second - r) > 1e-9) {
        throw duplicate_reward_conflict(
            "(" + fields[0] + "," + fields[1] + "," + fields[2] + ")");
      }
      it->second.first += p;
    }
  }
  if (max_state < 0) throw bad_header("no data rows");

  int S = max_state + 1;
  int A = max_action + 1;
  std::vector<std::vector<transition>> rows(
      static_cast<std::size_t>(S) * A);
  std::vector<bool> seen_state(S, false);
  for (const auto& [key, pr] : merged) {
    auto [s, a, s2] = key;
    if (pr.first == 0.0) continue;  // zero-probability rows carry no branch
    rows[static_cast<std::size_t>(s) * A + a].push_back(
        {s2, pr.first, pr.second});
    seen_state[s] = true;
  }
  for (int s = 0; s < S; ++s) {
    if (!seen_state[s]) {
      throw dangling_index("state " + std::to_string(s) +
                           " has no outgoing transitions");
    }
  }
  return mdp(S, A, std::move(rows), gamma);
}

mdp load_mdp_csv_file(const std::string& path, double gamma) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  return load_mdp_csv(in, gamma);
}

void save_mdp_csv(const mdp& m, std::ostream& out) {
  out << kHeader << "\n";
  for (int s = 0; s < m.n_states(); ++s) {
    for (int a = 0; a < m.n_actions(); ++a) {
      for (const transition& t : m.transitions(s, a)) {
        out << s << ',' << a << ',' << t.next << ','
            << format_double(t.prob) << ',' << format_double(t.reward)
            << '\n';
      }
    }
  }
}

void save_mdp_csv_file(const mdp& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path);
  save_mdp_csv(m, out);
  out.flush();
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace qmdp
