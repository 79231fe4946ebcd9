#include "sicra/resolver.hpp"

#include <algorithm>
#include <random>

#include "sicra/error.hpp"

namespace sicra {

std::string PacketSet::to_string() const {
  std::string out;
  for_each([&](PacketIndex i) {
    if (!out.empty()) out += ' ';
    out += std::to_string(i);
  });
  return out;
}

void SignalLedger::add(PacketSet members, bool failed) {
  members = members - decoded_;
  if (members.size() < 2)
    fail(ErrorKind::Domain, "a stored signal needs at least two undecoded packets");
  signals_.push_back({members, failed});
}

std::vector<LedgerDecode> SignalLedger::decode(PacketIndex packet, const RepairFn& repair) {
  if (packet < 0 || packet >= kMaxGroupSize)
    fail(ErrorKind::Domain, "packet index out of range");
  if (decoded_.contains(packet))
    fail(ErrorKind::Domain, "packet " + std::to_string(packet) + " already decoded");

  std::vector<LedgerDecode> out;
  std::uint64_t elapsed = 0;
  decoded_.insert(packet);
  while (true) {
    for (auto& s : signals_) s.members = s.members - decoded_;
    std::erase_if(signals_, [](const Signal& s) { return s.members.empty(); });

    auto singleton = std::find_if(signals_.begin(), signals_.end(), [](const Signal& s) {
      return s.members.size() == 1 && !s.failed;
    });
    if (singleton == signals_.end()) {
      singleton = std::find_if(signals_.begin(), signals_.end(),
                               [](const Signal& s) { return s.members.size() == 1; });
      if (singleton == signals_.end()) break;
      if (!repair)
        fail(ErrorKind::Config, "failed signal needs repair but no repair handler given");
      elapsed += repair(*singleton);
      singleton->failed = false;
    }
    const PacketIndex next = singleton->members.first();
    decoded_.insert(next);
    out.push_back({next, elapsed});
  }
  return out;
}

SplitDraw draw_split(PacketSet group, double p, Rng& rng, std::vector<PacketSet>* slots) {
  if (group.size() < 2) fail(ErrorKind::Domain, "splitting needs a group of at least two");
  if (!(p > 0.0 && p < 1.0))
    fail(ErrorKind::Config, "retransmission probability must lie in (0,1)");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SplitDraw draw;
  do {
    ++draw.split.delta;
    PacketSet w;
    group.for_each([&](PacketIndex i) {
      if (unit(rng) < p) w.insert(i);
    });
    if (slots) slots->push_back(w);
    draw.transmitters = w;
  } while (draw.transmitters.empty() || draw.transmitters == group);
  draw.split.split_size = draw.transmitters.size();
  return draw;
}

namespace {

class SrpRun {
 public:
  SrpRun(int group_size, std::span<const double> probs, double p_e, Rng& rng, bool trace)
      : probs_(probs), p_e_(p_e), rng_(rng), trace_(trace) {
    out_.decode_slot.assign(static_cast<std::size_t>(group_size), 0);
    repair_ = [this](const Signal& s) { return repair(s); };
  }

  SrpOutcome run(int group_size) {
    const PacketSet all = PacketSet::first_n(group_size);
    ledger_.add(all, draw_failure());
    resolve(all);
    out_.duration = clock_;
    if (trace_) {
      for (std::size_t i = 0; i < out_.decode_slot.size(); ++i)
        out_.trace[out_.decode_slot[i] - 1].decoded.insert(static_cast<PacketIndex>(i));
    }
    return std::move(out_);
  }

 private:
  bool draw_failure() {
    return p_e_ > 0.0 && std::bernoulli_distribution(p_e_)(rng_);
  }

  std::uint64_t repair(const Signal& s) {
    std::uint64_t spent = 0;
    do {
      ++spent;
      ++clock_;
      if (trace_) out_.trace.push_back({clock_, s.members, {}, true});
    } while (draw_failure());
    out_.repair_slots += spent;
    return spent;
  }

  void decode(PacketIndex packet) {
    const std::uint64_t at = clock_;
    out_.decode_slot[static_cast<std::size_t>(packet)] = at;
    for (const auto& d : ledger_.decode(packet, repair_))
      out_.decode_slot[static_cast<std::size_t>(d.packet)] = at + d.delay;
  }

  void resolve(PacketSet group) {
    const double p = probs_[static_cast<std::size_t>(group.size() - 2)];
    std::vector<PacketSet> slots;
    const auto draw = draw_split(group, p, rng_, trace_ ? &slots : nullptr);
    if (trace_) {
      for (std::size_t i = 0; i < slots.size(); ++i)
        out_.trace.push_back({clock_ + i + 1, slots[i], {}, false});
    }
    clock_ += draw.split.delta;

    const PacketSet sent = draw.transmitters;
    const PacketSet rest = group - sent;
    if (sent.size() == 1)
      decode(sent.first());
    else
      ledger_.add(sent, draw_failure());
    if (sent.size() >= 2) resolve(sent);
    // A lone remainder is recovered from the parent signal by cascade.
    if (rest.size() >= 2) resolve(rest);
  }

  std::span<const double> probs_;
  double p_e_;
  Rng& rng_;
  bool trace_;
  SignalLedger ledger_;
  SignalLedger::RepairFn repair_;
  std::uint64_t clock_ = 0;
  SrpOutcome out_;
};

}  // namespace

SrpOutcome run_srp(int group_size, std::span<const double> probs, double p_e, Rng& rng,
                   bool record_trace) {
  if (group_size < 2 || group_size > kMaxGroupSize)
    fail(ErrorKind::Domain, "resolve procedure needs 2..64 users, got " +
                                std::to_string(group_size));
  if (probs.size() + 1 < static_cast<std::size_t>(group_size))
    fail(ErrorKind::Config, "retransmission probabilities must cover k = 2.." +
                                std::to_string(group_size));
  for (int k = 2; k <= group_size; ++k) {
    const double p = probs[static_cast<std::size_t>(k - 2)];
    if (!(p > 0.0 && p < 1.0))
      fail(ErrorKind::Config, "retransmission probability p_" + std::to_string(k) +
                                  " must lie in (0,1)");
  }
  if (!(p_e >= 0.0 && p_e < 1.0))
    fail(ErrorKind::Domain, "SIC failure probability must lie in [0,1)");
  return SrpRun(group_size, probs, p_e, rng, record_trace).run(group_size);
}

}  // namespace sicra
