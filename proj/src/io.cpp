#include "srnis/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "srnis/error.hpp"

namespace srnis {

using ordered_json = nlohmann::ordered_json;

namespace {

const char* kind_name(Observable::Kind k) {
  switch (k) {
    case Observable::Kind::indicator:
      return "indicator";
    case Observable::Kind::linear:
      return "linear";
    case Observable::Kind::tabulated:
      return "tabulated";
  }
  return "?";
}

template <class T>
T require(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw Error(std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("field '") + key + "': " + e.what());
  }
}

Count to_count(double v, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) {
    throw Error(std::string(what) + " must be a non-negative integer");
  }
  return static_cast<Count>(v);
}

}  // namespace

ordered_json model_to_json(const Model& model) {
  const ReactionNetwork& net = model.network;
  ordered_json doc;
  doc["species"] = net.species();
  doc["x0"] = net.initial_state();
  doc["T"] = net.final_time();
  ordered_json reactions = ordered_json::array();
  for (const Reaction& r : net.reactions()) {
    ordered_json item;
    item["alpha"] = r.consumed;
    item["beta"] = r.produced;
    item["theta"] = r.rate;
    reactions.push_back(item);
  }
  doc["reactions"] = reactions;
  ordered_json obs;
  obs["kind"] = kind_name(model.observable.kind());
  obs["species"] = model.observable.species();
  if (model.observable.kind() == Observable::Kind::indicator) obs["gamma"] = model.observable.gamma();
  if (model.observable.kind() == Observable::Kind::tabulated) obs["table"] = model.observable.table();
  doc["observable"] = obs;
  return doc;
}

Model model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error("model document must be an object");
  auto species = require<std::vector<std::string>>(doc, "species");
  State x0;
  for (double v : require<std::vector<double>>(doc, "x0")) x0.push_back(to_count(v, "x0 entry"));
  const double T = require<double>(doc, "T");
  if (!doc.contains("reactions") || !doc["reactions"].is_array()) throw Error("missing reactions array");
  std::vector<Reaction> reactions;
  for (const auto& item : doc["reactions"]) {
    Reaction r;
    for (double v : require<std::vector<double>>(item, "alpha")) {
      r.consumed.push_back(static_cast<int>(to_count(v, "alpha entry")));
    }
    for (double v : require<std::vector<double>>(item, "beta")) {
      r.produced.push_back(static_cast<int>(to_count(v, "beta entry")));
    }
    r.rate = require<double>(item, "theta");
    reactions.push_back(std::move(r));
  }
  ReactionNetwork net(std::move(species), std::move(reactions), std::move(x0), T);

  if (!doc.contains("observable")) throw Error("missing field 'observable'");
  const auto& o = doc["observable"];
  const auto kind = require<std::string>(o, "kind");
  const auto idx = static_cast<std::size_t>(to_count(require<double>(o, "species"), "observable species"));
  Observable obs = [&] {
    if (kind == "indicator") return Observable::indicator(idx, require<double>(o, "gamma"));
    if (kind == "linear") return Observable::linear(idx);
    if (kind == "tabulated") return Observable::tabulated(idx, require<std::vector<double>>(o, "table"));
    throw Error("unknown observable kind '" + kind + "'");
  }();
  obs.check_dimension(net.species_count());
  return Model{std::move(net), std::move(obs)};
}

std::string model_document(const Model& model) { return model_to_json(model).dump(2) + "\n"; }

Model load_model(const std::string& name_or_path) {
  for (const auto& name : catalog_names()) {
    if (name == name_or_path) return catalog(name);
  }
  return model_from_json(read_json_file(name_or_path));
}

ordered_json ansatz_to_json(const AnsatzFile& file) {
  const AnsatzParams& p = file.params;
  ordered_json doc;
  doc["beta_space"] = p.beta_space;
  doc["beta_time"] = p.beta_time;
  doc["b0"] = p.b0;
  doc["beta0"] = p.beta0;
  doc["target_species"] = p.target_species;
  doc["gamma"] = p.gamma;
  ordered_json prov;
  prov["dt_pl"] = file.provenance.dt_pl;
  prov["seed"] = file.provenance.seed;
  prov["iteration"] = file.provenance.iteration;
  doc["provenance"] = prov;
  return doc;
}

AnsatzFile ansatz_from_json(const nlohmann::json& doc) {
  AnsatzFile f;
  f.params.beta_space = require<std::vector<double>>(doc, "beta_space");
  f.params.beta_time = require<double>(doc, "beta_time");
  f.params.b0 = require<double>(doc, "b0");
  f.params.beta0 = require<double>(doc, "beta0");
  f.params.target_species = static_cast<std::size_t>(to_count(require<double>(doc, "target_species"), "target_species"));
  f.params.gamma = require<double>(doc, "gamma");
  if (f.params.target_species >= f.params.beta_space.size()) throw Error("target_species out of range");
  if (doc.contains("provenance")) {
    const auto& p = doc["provenance"];
    f.provenance.dt_pl = require<double>(p, "dt_pl");
    f.provenance.seed = require<std::uint64_t>(p, "seed");
    f.provenance.iteration = require<int>(p, "iteration");
  }
  return f;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::separator() {
  if (written_ == columns_) throw Error("CSV row has more fields than the header");
  if (written_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double v) {
  separator();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::int64_t v) {
  separator();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::uint64_t v) {
  separator();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  separator();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  if (written_ != columns_) throw Error("CSV row has fewer fields than the header");
  out_ << '\n';
  written_ = 0;
}

}  // namespace srnis
