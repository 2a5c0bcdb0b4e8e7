#include "coreset/artifact.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace coreset::io {

namespace {

void append_index_array(std::ostringstream& out, const std::vector<Index>& values) {
  out << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out << ',';
    out << values[i];
  }
  out << ']';
}

void append_double_array(std::ostringstream& out, const std::vector<double>& values) {
  out << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out << ',';
    out << format_double(values[i]);
  }
  out << ']';
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string to_json(const CoresetArtifact& artifact) {
  std::ostringstream out;
  out << "{\"schema_version\":\"" << artifact.schema_version << "\",";
  out << "\"indices\":";
  append_index_array(out, artifact.indices);
  out << ",\"weights\":";
  append_double_array(out, artifact.weights);
  out << ",\"reg_diag\":{";
  bool first = true;
  for (const auto& [pos, value] : artifact.reg_diag) {
    if (!first) out << ',';
    first = false;
    out << '"' << pos << "\":" << format_double(value);
  }
  out << "},\"meta\":{";
  out << "\"lambda\":" << format_double(artifact.lambda) << ',';
  if (artifact.p) {
    out << "\"p\":" << *artifact.p << ',';
  } else {
    out << "\"k\":" << artifact.k.value_or(0) << ',';
  }
  out << "\"n\":" << artifact.n << ',';
  out << "\"d\":" << artifact.d << ',';
  out << "\"kernel_rank\":" << artifact.kernel_rank << ',';
  out << "\"sd_bound\":" << format_double(artifact.sd_bound) << ',';
  out << "\"selected_count\":" << artifact.selected_count;
  out << "}}\n";
  return out.str();
}

CoresetArtifact artifact_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("artifact is not valid JSON: ") + e.what());
  }

  CoresetArtifact artifact;
  try {
    artifact.schema_version = doc.at("schema_version").get<std::string>();
    if (artifact.schema_version != kArtifactSchemaVersion) {
      throw input_error("unsupported artifact schema version '" + artifact.schema_version + "'");
    }
    artifact.indices = doc.at("indices").get<std::vector<Index>>();
    artifact.weights = doc.at("weights").get<std::vector<double>>();
    for (const auto& [key, value] : doc.at("reg_diag").items()) {
      artifact.reg_diag[static_cast<Index>(std::stoll(key))] = value.get<double>();
    }
    const auto& meta = doc.at("meta");
    artifact.lambda = meta.at("lambda").get<double>();
    if (meta.contains("p")) artifact.p = meta.at("p").get<int>();
    if (meta.contains("k")) artifact.k = meta.at("k").get<Index>();
    if (!artifact.p && !artifact.k) {
      throw input_error("artifact meta needs either 'p' or 'k'");
    }
    artifact.n = meta.at("n").get<Index>();
    artifact.d = meta.at("d").get<Index>();
    artifact.kernel_rank = meta.at("kernel_rank").get<Index>();
    artifact.sd_bound = meta.at("sd_bound").get<double>();
    artifact.selected_count = meta.at("selected_count").get<Index>();
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("artifact is missing required fields: ") + e.what());
  }
  if (artifact.indices.size() != artifact.weights.size()) {
    throw input_error("artifact indices and weights are misaligned");
  }
  for (double w : artifact.weights) {
    if (!(w > 0.0)) throw input_error("artifact weights must be strictly positive");
  }
  return artifact;
}

std::string to_json(const regression::EquivalenceReport& report) {
  std::ostringstream out;
  out << "{\"num_queries\":" << report.num_queries << ',';
  out << "\"max_abs_gap\":" << format_double(report.max_abs_gap) << ',';
  out << "\"max_rel_gap\":" << format_double(report.max_rel_gap) << ',';
  out << "\"full_solution\":";
  std::vector<double> full(report.full_solution.data(),
                           report.full_solution.data() + report.full_solution.size());
  append_double_array(out, full);
  out << ",\"coreset_solution\":";
  std::vector<double> reduced(report.coreset_solution.data(),
                              report.coreset_solution.data() + report.coreset_solution.size());
  append_double_array(out, reduced);
  out << ",\"solution_gap\":" << format_double(report.solution_gap) << ',';
  out << "\"full_rows\":" << report.full_rows << ',';
  out << "\"coreset_rows\":" << report.coreset_rows << ',';
  out << "\"build_wall_ms\":" << format_double(report.build_wall_ms) << ',';
  out << "\"verify_wall_ms\":" << format_double(report.verify_wall_ms);
  out << "}\n";
  return out.str();
}

}  // namespace coreset::io
