#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sicra/analysis.hpp"
#include "sicra/random.hpp"

namespace sicra {

/// Index of a packet inside one resolve procedure, 0..63.
using PacketIndex = int;

inline constexpr int kMaxGroupSize = 64;

/// Small set of packet indices backed by a bit mask.
class PacketSet {
 public:
  constexpr PacketSet() = default;
  constexpr explicit PacketSet(std::uint64_t bits) : bits_(bits) {}

  static constexpr PacketSet first_n(int n) {
    return PacketSet(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
  }
  static constexpr PacketSet single(PacketIndex i) { return PacketSet(std::uint64_t{1} << i); }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(PacketIndex i) const { return (bits_ >> i) & 1U; }
  constexpr PacketIndex first() const { return std::countr_zero(bits_); }

  constexpr void insert(PacketIndex i) { bits_ |= std::uint64_t{1} << i; }
  constexpr void erase(PacketIndex i) { bits_ &= ~(std::uint64_t{1} << i); }

  constexpr PacketSet operator-(PacketSet o) const { return PacketSet(bits_ & ~o.bits_); }
  constexpr PacketSet operator|(PacketSet o) const { return PacketSet(bits_ | o.bits_); }
  constexpr PacketSet operator&(PacketSet o) const { return PacketSet(bits_ & o.bits_); }
  constexpr bool operator==(const PacketSet&) const = default;

  template <class F>
  void for_each(F&& f) const {
    for (std::uint64_t b = bits_; b; b &= b - 1) f(std::countr_zero(b));
  }

  /// "{0,2,5}"-style rendering, space separated without braces for CSV.
  std::string to_string() const;

 private:
  std::uint64_t bits_ = 0;
};

/// An undecoded superposition held by the receiver.
struct Signal {
  PacketSet members;  // constituents not yet decoded
  bool failed = false;
};

struct LedgerDecode {
  PacketIndex packet = 0;
  std::uint64_t delay = 0;  // repair slots spent before this decode
};

/// Memory of undecoded received superpositions. Decoding a packet subtracts
/// it everywhere; any signal left with one constituent yields that packet,
/// which cascades further.
class SignalLedger {
 public:
  /// Slots spent rebuilding a usable copy of a failed signal (>= 1).
  using RepairFn = std::function<std::uint64_t(const Signal&)>;

  /// Stores a superposition. Already-decoded constituents are dropped; at
  /// least two must remain (a singleton is a decode, not a signal).
  void add(PacketSet members, bool failed = false);

  /// Registers `packet` as freshly decoded and returns every packet decoded
  /// by cascade, in decode order. Usable singletons are consumed before any
  /// failed one is repaired.
  std::vector<LedgerDecode> decode(PacketIndex packet, const RepairFn& repair = {});

  bool is_decoded(PacketIndex packet) const { return decoded_.contains(packet); }
  PacketSet decoded() const { return decoded_; }
  std::span<const Signal> signals() const { return signals_; }

 private:
  std::vector<Signal> signals_;
  PacketSet decoded_;
};

/// Per-slot record of a resolve procedure, for walkthrough traces.
struct SrpTraceRow {
  std::uint64_t slot_offset = 0;
  PacketSet transmitters;
  PacketSet decoded;
  bool repair = false;
};

struct SrpOutcome {
  std::uint64_t duration = 0;             // X (X^(e) when p_e > 0)
  std::vector<std::uint64_t> decode_slot;  // [packet] -> offset in 1..duration
  std::uint64_t repair_slots = 0;
  std::vector<SrpTraceRow> trace;          // filled only when requested
};

struct SplitDraw {
  analysis::GroupSplit split;
  PacketSet transmitters;
};

/// Repeats Bernoulli(p) transmissions of `group` until neither nobody nor
/// everybody transmits. `slots`, if given, receives each slot's transmitters.
SplitDraw draw_split(PacketSet group, double p, Rng& rng,
                     std::vector<PacketSet>* slots = nullptr);

/// Runs the recursive SIC resolve procedure for packets 0..group_size-1.
/// probs[k-2] is the retransmission probability for a subgroup of size k and
/// must cover k = 2..group_size. The initiating superposition is placed in
/// the ledger first, failed with probability p_e.
SrpOutcome run_srp(int group_size, std::span<const double> probs, double p_e,
                   Rng& rng, bool record_trace = false);

}  // namespace sicra
