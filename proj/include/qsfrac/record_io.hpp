#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "qsfrac/config.hpp"
#include "qsfrac/evolution.hpp"

namespace qsfrac {

inline constexpr int kRecordFormatVersion = 1;

/// Versioned text record: header, embedded effective config, per-knot body.
/// Doubles use %.17g so reading reproduces every stored bit.
void write_record(std::ostream& out, const EvolutionRecord& record);
/// Only the per-knot body (the part that must not depend on thread count).
std::string record_body(const EvolutionRecord& record);

/// A record together with the mesh and model rebuilt from its embedded config.
struct LoadedRecord {
  RunConfig config;
  std::shared_ptr<const Mesh> mesh;
  EnergyModel model;
  EvolutionRecord record;
};

LoadedRecord read_record(std::istream& in);
LoadedRecord read_record_file(const std::string& path);
void write_record_file(const std::string& path, const EvolutionRecord& record);

/// Attaches config text and hashes to a fresh record.
void stamp_record(EvolutionRecord& record, const RunConfig& config);

/// Columns t, W, Es, F, G, E_total, crack_length, dof_count; %.16e.
void write_csv(std::ostream& out, const EvolutionRecord& record);

}  // namespace qsfrac
