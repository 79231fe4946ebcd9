#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sicra/resolver.hpp"
#include "sicra/simulator.hpp"

namespace sicra::csv {

// Column layouts written by this module. Fields never contain commas or
// quotes; sets of packet indices are space separated inside one field.
inline constexpr const char* kSweepHeader =
    "lambda,throughput,mean_delay,collision_rate,idle_rate,srp_fraction";
inline constexpr const char* kTraceHeader = "slot,true_backlog,estimated_nu";
inline constexpr const char* kEventHeader = "slot,event,nu,lambda_e,p_star";
inline constexpr const char* kSrpTraceHeader = "slot_offset,transmitters,decoded,repairs";

void write_sweep(std::ostream& os, std::span<const SweepPoint> points);
void write_backlog(std::ostream& os, std::span<const BacklogSample> samples);
void write_trace(std::ostream& os, std::span<const TracePoint> points);
void write_events(std::ostream& os, std::span<const EventRecord> events);
void write_srp_trace(std::ostream& os, std::span<const SrpTraceRow> rows);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

/// Reads a header line plus rows; every row must have the header's width.
Table read(std::istream& is);
Table read_file(const std::filesystem::path& path);

/// Opens `path`, runs `body`, and reports failures with the path attached.
void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& body);

std::string format_number(double v);

}  // namespace sicra::csv
