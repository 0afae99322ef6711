#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "simlab/classes.hpp"
#include "simlab/exbmdp.hpp"
#include "simlab/mdp.hpp"
#include "simlab/session.hpp"
#include "simlab/value_tables.hpp"

namespace simlab {

// JSON bindings (argument-dependent lookup hooks for nlohmann::json). Doubles
// round-trip exactly: the writer emits the shortest representation that
// parses back to the same value. Loaders re-validate structural invariants,
// so a hand-edited file with a bad probability row is rejected at load time.
void to_json(nlohmann::json& j, const SampleLedger& ledger);
void from_json(const nlohmann::json& j, SampleLedger& ledger);

void to_json(nlohmann::json& j, const TabularMDP& m);
void from_json(const nlohmann::json& j, TabularMDP& m);

void to_json(nlohmann::json& j, const ExBMDPSpec& spec);
void from_json(const nlohmann::json& j, ExBMDPSpec& spec);

void to_json(nlohmann::json& j, const DecoderClass& dec);
void from_json(const nlohmann::json& j, DecoderClass& dec);

void to_json(nlohmann::json& j, const QTable& q);
void from_json(const nlohmann::json& j, QTable& q);

void to_json(nlohmann::json& j, const VTable& v);
void from_json(const nlohmann::json& j, VTable& v);

void to_json(nlohmann::json& j, const FiniteQClass& cls);
void from_json(const nlohmann::json& j, FiniteQClass& cls);

void to_json(nlohmann::json& j, const FiniteVClass& cls);
void from_json(const nlohmann::json& j, FiniteVClass& cls);

// Trajectories serialize element-wise through these hooks (Trajectory is a
// vector of StepRecord).
void to_json(nlohmann::json& j, const StepRecord& step);
void from_json(const nlohmann::json& j, StepRecord& step);

// Instance files on disk hold one TabularMDP as a pretty-printed JSON object
// with keys {horizon, states_per_layer, num_actions, init_dist, transitions,
// reward_means, reward_law}.
std::string instance_to_text(const TabularMDP& m);
TabularMDP instance_from_text(const std::string& text);
void save_instance(const TabularMDP& m, const std::string& path);
TabularMDP load_instance(const std::string& path);

// Expert-trajectory corpora for imitation replay tests.
std::string trajectories_to_text(const std::vector<Trajectory>& corpus);
std::vector<Trajectory> trajectories_from_text(const std::string& text);

// Plain-file helpers used by every emitter.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// Minimal CSV with RFC-style quoting: fields containing a comma, quote, or
// newline are wrapped in double quotes with embedded quotes doubled. Our
// schemas only ever hold numbers and short tokens, but the writer and parser
// are symmetric so round-trip tests hold for arbitrary content.
std::string csv_escape(const std::string& field);
std::string csv_line(const std::vector<std::string>& fields);
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);
std::vector<std::vector<std::string>> csv_parse(const std::string& text);

// Fixed-format double for CSV cells: enough digits to round-trip.
std::string format_double(double v);

}  // namespace simlab
