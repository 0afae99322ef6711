#include "simlab/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "simlab/errors.hpp"

namespace simlab {

using nlohmann::json;

void to_json(json& j, const SampleLedger& ledger) {
  j = json{{"episodes_started", ledger.episodes_started},
           {"transitions_sampled", ledger.transitions_sampled},
           {"resets", ledger.resets}};
}

void from_json(const json& j, SampleLedger& ledger) {
  j.at("episodes_started").get_to(ledger.episodes_started);
  j.at("transitions_sampled").get_to(ledger.transitions_sampled);
  j.at("resets").get_to(ledger.resets);
}

void to_json(json& j, const TabularMDP& m) {
  j = json{{"horizon", m.horizon},
           {"states_per_layer", m.states_per_layer},
           {"num_actions", m.num_actions},
           {"init_dist", m.init_dist},
           {"transitions", m.transitions},
           {"reward_means", m.reward_means},
           {"reward_law", to_string(m.reward_law)}};
}

void from_json(const json& j, TabularMDP& m) {
  j.at("horizon").get_to(m.horizon);
  j.at("states_per_layer").get_to(m.states_per_layer);
  j.at("num_actions").get_to(m.num_actions);
  j.at("init_dist").get_to(m.init_dist);
  j.at("transitions").get_to(m.transitions);
  j.at("reward_means").get_to(m.reward_means);
  m.reward_law = reward_law_from_string(j.at("reward_law").get<std::string>());
}

void to_json(json& j, const ExBMDPSpec& spec) {
  j = json{{"S", spec.S},
           {"Xi", spec.Xi},
           {"A", spec.A},
           {"H", spec.H},
           {"endo_init", spec.endo_init},
           {"t_endo", spec.t_endo},
           {"exo_init", spec.exo_init},
           {"t_exo", spec.t_exo},
           {"rewards", spec.rewards},
           {"reward_law", to_string(spec.reward_law)},
           {"lambda", spec.lambda},
           {"target_gap", spec.target_gap}};
}

void from_json(const json& j, ExBMDPSpec& spec) {
  j.at("S").get_to(spec.S);
  j.at("Xi").get_to(spec.Xi);
  j.at("A").get_to(spec.A);
  j.at("H").get_to(spec.H);
  j.at("endo_init").get_to(spec.endo_init);
  j.at("t_endo").get_to(spec.t_endo);
  j.at("exo_init").get_to(spec.exo_init);
  j.at("t_exo").get_to(spec.t_exo);
  j.at("rewards").get_to(spec.rewards);
  spec.reward_law =
      reward_law_from_string(j.at("reward_law").get<std::string>());
  spec.lambda = j.value("lambda", 0.0);
  spec.target_gap = j.value("target_gap", 0.0);
}

void to_json(json& j, const DecoderClass& dec) {
  j = json{{"members", dec.members}, {"true_index", dec.true_index}};
}

void from_json(const json& j, DecoderClass& dec) {
  j.at("members").get_to(dec.members);
  j.at("true_index").get_to(dec.true_index);
}

void to_json(json& j, const QTable& q) { j = json{{"q", q.q}}; }

void from_json(const json& j, QTable& q) { j.at("q").get_to(q.q); }

void to_json(json& j, const VTable& v) { j = json{{"v", v.v}}; }

void from_json(const json& j, VTable& v) { j.at("v").get_to(v.v); }

void to_json(json& j, const FiniteQClass& cls) {
  j = json{{"members", cls.members}, {"origin", cls.origin}};
}

void from_json(const json& j, FiniteQClass& cls) {
  j.at("members").get_to(cls.members);
  cls.origin = j.value("origin", std::string{});
}

void to_json(json& j, const FiniteVClass& cls) {
  j = json{{"members", cls.members}, {"origin", cls.origin}};
}

void from_json(const json& j, FiniteVClass& cls) {
  j.at("members").get_to(cls.members);
  cls.origin = j.value("origin", std::string{});
}

void to_json(json& j, const StepRecord& step) {
  j = json{{"layer", step.layer},
           {"state", step.state},
           {"action", step.action},
           {"reward", step.reward}};
}

void from_json(const json& j, StepRecord& step) {
  j.at("layer").get_to(step.layer);
  j.at("state").get_to(step.state);
  j.at("action").get_to(step.action);
  j.at("reward").get_to(step.reward);
}

std::string instance_to_text(const TabularMDP& m) {
  m.validate();
  return json(m).dump(2) + "\n";
}

TabularMDP instance_from_text(const std::string& text) {
  TabularMDP m;
  try {
    json::parse(text).get_to(m);
  } catch (const json::exception& e) {
    throw validation_error(std::string("instance JSON malformed: ") + e.what());
  }
  m.validate();
  return m;
}

void save_instance(const TabularMDP& m, const std::string& path) {
  write_text_file(path, instance_to_text(m));
}

TabularMDP load_instance(const std::string& path) {
  return instance_from_text(read_text_file(path));
}

std::string trajectories_to_text(const std::vector<Trajectory>& corpus) {
  return json(corpus).dump(2) + "\n";
}

std::vector<Trajectory> trajectories_from_text(const std::string& text) {
  try {
    return json::parse(text).get<std::vector<Trajectory>>();
  } catch (const json::exception& e) {
    throw validation_error(std::string("trajectory JSON malformed: ") +
                           e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw validation_error("short write: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(fields[i]);
  }
  out += '\n';
  return out;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out = csv_line(header);
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw validation_error("csv_table: row width differs from header");
    out += csv_line(row);
  }
  return out;
}

std::vector<std::vector<std::string>> csv_parse(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto end_field = [&]() {
    row.push_back(field);
    field.clear();
  };
  auto end_row = [&]() {
    end_field();
    rows.push_back(row);
    row.clear();
    row_has_content = false;
  };
  while (i < n) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field += '"';
          i += 2;
        } else {
          quoted = false;
          ++i;
        }
      } else {
        field += c;
        ++i;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_has_content = true;
        ++i;
        break;
      case ',':
        end_field();
        row_has_content = true;
        ++i;
        break;
      case '\r':
        ++i;
        break;
      case '\n':
        end_row();
        ++i;
        break;
      default:
        field += c;
        row_has_content = true;
        ++i;
        break;
    }
  }
  if (quoted) throw validation_error("csv_parse: unterminated quote");
  if (row_has_content || !row.empty()) end_row();
  return rows;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace simlab
