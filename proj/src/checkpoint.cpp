// SPDX-License-Identifier: Apache-2.0
#include "cookgen/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace cookgen {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian; big-endian hosts need byte swaps");

namespace {

using nlohmann::json;

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params) {
  const std::vector<std::string> names = tensor_names(params.hyper);
  const std::vector<const Matd*> tensors = tensor_ptrs(params);
  json manifest = json::array();
  for (std::size_t k = 0; k < tensors.size(); ++k)
    manifest.push_back({{"name", names[k]},
                        {"rows", tensors[k]->rows()},
                        {"cols", tensors[k]->cols()}});
  json header = {{"format_version", 1},
                 {"variant", variant_name(params.hyper.variant)},
                 {"M", params.hyper.vocab_size},
                 {"d", params.hyper.embed_dim},
                 {"d_1", params.hyper.hidden1_dim},
                 {"d_2", params.hyper.hidden2_dim},
                 {"L", params.hyper.max_len},
                 {"J", params.hyper.poly_order},
                 {"has_bias", params.hyper.has_bias},
                 {"tensor_manifest", manifest}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("checkpoint: cannot write " + path);
  out << header.dump() << "\n";
  std::vector<float> buffer;
  for (const Matd* t : tensors) {
    buffer.resize(static_cast<std::size_t>(t->size()));
    const double* src = t->data();
    for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i] = static_cast<float>(src[i]);
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(float)));
  }
  if (!out) throw error("checkpoint: write failed for " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("checkpoint: cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw error("checkpoint: " + path + " is empty");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw error("checkpoint: " + path + ": bad header: " + e.what());
  }
  if (header.value("format_version", 0) != 1)
    throw error("checkpoint: " + path + ": unsupported format_version");

  HyperParams hyper;
  try {
    hyper.variant = variant_from_name(header.at("variant").get<std::string>());
    hyper.vocab_size = header.at("M").get<int>();
    hyper.embed_dim = header.at("d").get<int>();
    hyper.hidden1_dim = header.at("d_1").get<int>();
    hyper.hidden2_dim = header.at("d_2").get<int>();
    hyper.max_len = header.at("L").get<int>();
    hyper.poly_order = header.at("J").get<int>();
    hyper.has_bias = header.at("has_bias").get<bool>();
  } catch (const json::exception& e) {
    throw error("checkpoint: " + path + ": bad header: " + e.what());
  }

  // Seed is irrelevant here; every entry is overwritten below.
  ModelParams params = init_params(hyper, 0);
  const std::vector<std::string> names = tensor_names(hyper);
  const std::vector<Matd*> tensors = tensor_ptrs(params);
  const json& manifest = header.at("tensor_manifest");
  if (manifest.size() != tensors.size())
    throw error("checkpoint: " + path + ": manifest lists " + std::to_string(manifest.size()) +
                " tensors, expected " + std::to_string(tensors.size()));
  std::vector<float> buffer;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    const json& entry = manifest[k];
    if (entry.at("name").get<std::string>() != names[k])
      throw error("checkpoint: " + path + ": manifest tensor " + std::to_string(k) + " is '" +
                  entry.at("name").get<std::string>() + "', expected '" + names[k] + "'");
    if (entry.at("rows").get<Eigen::Index>() != tensors[k]->rows() ||
        entry.at("cols").get<Eigen::Index>() != tensors[k]->cols())
      throw error("checkpoint: " + path + ": tensor " + names[k] + " has shape " +
                  shape_str(entry.at("rows").get<Eigen::Index>(),
                            entry.at("cols").get<Eigen::Index>()) +
                  ", expected " + shape_str(*tensors[k]));
    buffer.resize(static_cast<std::size_t>(tensors[k]->size()));
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != buffer.size() * sizeof(float))
      throw error("checkpoint: " + path + ": payload truncated at tensor " + names[k]);
    double* dst = tensors[k]->data();
    for (std::size_t i = 0; i < buffer.size(); ++i) dst[i] = static_cast<double>(buffer[i]);
  }
  if (in.peek() != std::ifstream::traits_type::eof())
    throw error("checkpoint: " + path + ": trailing bytes after payload");
  return params;
}

}  // namespace cookgen
