#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sicra {

enum class RetxMode {
  Optimized,  // sequentially optimized p_k
  Half,       // p_k = 1/2 for every group size
};

std::string_view to_string(RetxMode mode) noexcept;
RetxMode parse_retx_mode(std::string_view text);

/// Precomputed control constants for one (M, p_e) operating point. Immutable
/// once built; share by const reference or shared_ptr<const>.
struct PolicyTable {
  int capability = 1;          // M
  double failure_prob = 0.0;   // p_e
  RetxMode retx_mode = RetxMode::Optimized;
  double x_star = 1.0;         // optimal mean transmissions per normal slot
  double s_star = 0.0;         // maximum service rate, packets/slot
  double c_m = 0.0;            // backlog correction after a collision
  std::vector<double> srp_mean;    // [k-2] -> E[X_k] (E[X^(e)_k] if p_e > 0)
  std::vector<double> retx_probs;  // [k-2] -> p_k

  double srp_mean_for(int k) const;
  double retx_prob_for(int k) const;
};

PolicyTable build_policy_table(int capability, double failure_prob,
                               RetxMode mode = RetxMode::Optimized);

/// Throws Config if the table violates its invariants.
void validate(const PolicyTable& table);

// Flat `key = value` text, one entry per line, vectors comma-separated,
// '#' starts a comment. Values round-trip exactly.
std::string serialize(const PolicyTable& table);
PolicyTable parse_policy_table(std::string_view text);

void save_policy_table(const PolicyTable& table, const std::filesystem::path& path);
PolicyTable load_policy_table(const std::filesystem::path& path);

}  // namespace sicra
