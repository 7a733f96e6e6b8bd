#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sympcae/model_graph.hpp"
#include "sympcae/psd.hpp"

namespace sympcae {

namespace fs = std::filesystem;

// Writes bytes to a sibling temporary file and renames it into place.
void write_file_atomic(const fs::path& path, const std::string& bytes);
std::string read_file(const fs::path& path);

// Snapshot file: 64-byte header then one little-endian row per state.
enum class SnapshotSource : std::uint32_t { Wave = 0, Nls = 1, SineGordon = 2, Latent = 3 };

struct SnapshotFile {
  SnapshotSource source = SnapshotSource::Wave;
  double dt = 0.0;
  Index n1 = 0;
  Index n2 = 1;
  // One state per column.
  Mat states;
};

std::string encode_snapshots(const SnapshotFile& s);
SnapshotFile decode_snapshots(const std::string& bytes);
void write_snapshots(const fs::path& path, const SnapshotFile& s);
SnapshotFile read_snapshots(const fs::path& path);

// Model checkpoint: graphs with their parameters and frozen pooling maps,
// extra named matrices, and free-form string metadata.
struct Checkpoint {
  std::string type;
  std::vector<ModelGraph> graphs;
  std::map<std::string, Mat> extras;
  std::map<std::string, std::string> meta;
};

std::string encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(const std::string& bytes);
void write_checkpoint(const fs::path& path, const Checkpoint& c);
Checkpoint read_checkpoint(const fs::path& path);

Checkpoint make_checkpoint(const Autoencoder& ae);
Checkpoint make_checkpoint(const PsdBasis& basis);
Checkpoint make_sympnet_checkpoint(const ModelGraph& phi);
Autoencoder autoencoder_from(const Checkpoint& c);
PsdBasis psd_basis_from(const Checkpoint& c);
ModelGraph sympnet_from(const Checkpoint& c);

// Scientific notation with six significant digits.
std::string format_number(double v);

// Comma-separated table; cells are written verbatim.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> cells);
  std::string str() const;
  void write(const fs::path& path) const { write_file_atomic(path, str()); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Plain numeric matrix, one row per line, no header.
std::string matrix_csv(const Mat& M);

}  // namespace sympcae
