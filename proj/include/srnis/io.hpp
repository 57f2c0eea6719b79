#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "srnis/ansatz.hpp"
#include "srnis/model.hpp"

namespace srnis {

nlohmann::ordered_json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& doc);

/// Canonical text of a model document, as shipped in models/.
std::string model_document(const Model& model);

/// Catalog name or path to a model file.
Model load_model(const std::string& name_or_path);

struct LearningProvenance {
  double dt_pl = 0.0;
  std::uint64_t seed = 0;
  int iteration = -1;
};

struct AnsatzFile {
  AnsatzParams params;
  LearningProvenance provenance;
};

nlohmann::ordered_json ansatz_to_json(const AnsatzFile& file);
AnsatzFile ansatz_from_json(const nlohmann::json& doc);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// %.17g
std::string format_double(double v);

/// Minimal CSV writer; doubles go through format_double.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(std::int64_t v);
  CsvWriter& operator<<(std::uint64_t v);
  CsvWriter& operator<<(int v) { return *this << static_cast<std::int64_t>(v); }
  CsvWriter& operator<<(const std::string& v);
  void end_row();

 private:
  void separator();

  std::ostream& out_;
  std::size_t columns_;
  std::size_t written_ = 0;
};

}  // namespace srnis
