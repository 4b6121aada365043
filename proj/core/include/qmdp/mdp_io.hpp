#pragma once

#include <iosfwd>
#include <string>

#include "qmdp/mdp.hpp"

namespace qmdp {

// CSV schema: header exactly `idstatefrom,idaction,idstateto,probability,reward`,
// 0-based integer indices, decimal reals, `\n` or `\r\n` endings. Duplicate
// (s,a,s') rows merge by probability sum; their rewards must agree within
// 1e-9. State count is the max index seen on either side plus one; a state
// referenced only as a destination is a dangling index.
mdp load_mdp_csv(std::istream& in, double gamma = 0.9);
mdp load_mdp_csv_file(const std::string& path, double gamma = 0.9);

void save_mdp_csv(const mdp& m, std::ostream& out);
void save_mdp_csv_file(const mdp& m, const std::string& path);

}  // namespace qmdp
