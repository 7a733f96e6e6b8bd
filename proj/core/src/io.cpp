#include "sympcae/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sympcae/pooling.hpp"

namespace sympcae {

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kEndianTag = 0x01020304;

template <class T>
T byteswap_if_needed(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

class Writer {
 public:
  template <class T>
  void put(T v) {
    v = byteswap_if_needed(v);
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out_.append(b, sizeof(T));
  }
  void put_bytes(const std::string& s) { out_.append(s); }
  void put_string(const std::string& s) {
    put<std::uint64_t>(s.size());
    out_.append(s);
  }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& in, const char* what) : in_(in), what_(what) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return byteswap_if_needed(v);
  }
  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string get_string() { return get_bytes(checked_size(get<std::uint64_t>())); }
  std::size_t checked_size(std::uint64_t n) const {
    if (n > in_.size()) throw IoError(std::string(what_) + ": length field exceeds file size");
    return static_cast<std::size_t>(n);
  }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw IoError(std::string(what_) + ": truncated file");
  }
  const std::string& in_;
  const char* what_;
  std::size_t pos_ = 0;
};

std::string magic(const char* tag) {
  std::string m(tag);
  m.resize(8, '\0');
  return m;
}

void check_header(Reader& r, const char* tag, const char* what) {
  if (r.get_bytes(8) != magic(tag)) throw IoError(std::string(what) + ": bad magic");
  if (r.get<std::uint32_t>() != kVersion) throw IoError(std::string(what) + ": unsupported version");
  if (r.get<std::uint32_t>() != kEndianTag) throw IoError(std::string(what) + ": endianness tag mismatch");
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string encode_snapshots(const SnapshotFile& s) {
  Writer w;
  w.put_bytes(magic("SSNP1"));
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(kEndianTag);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.source));
  w.put<std::uint32_t>(0);
  w.put<std::uint64_t>(static_cast<std::uint64_t>(s.states.rows()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(s.states.cols()));
  w.put<double>(s.dt);
  w.put<std::uint64_t>(static_cast<std::uint64_t>(s.n1));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(s.n2));
  for (Index j = 0; j < s.states.cols(); ++j) {
    for (Index i = 0; i < s.states.rows(); ++i) w.put<double>(s.states(i, j));
  }
  return std::move(w.str());
}

SnapshotFile decode_snapshots(const std::string& bytes) {
  Reader r(bytes, "snapshot file");
  check_header(r, "SSNP1", "snapshot file");
  SnapshotFile s;
  const auto src = r.get<std::uint32_t>();
  if (src > 3) throw IoError("snapshot file: unknown source id " + std::to_string(src));
  s.source = static_cast<SnapshotSource>(src);
  r.get<std::uint32_t>();
  const auto dim = r.get<std::uint64_t>();
  const auto count = r.get<std::uint64_t>();
  s.dt = r.get<double>();
  s.n1 = static_cast<Index>(r.get<std::uint64_t>());
  s.n2 = static_cast<Index>(r.get<std::uint64_t>());
  if (dim != 0 && count > bytes.size() / (8 * dim)) throw IoError("snapshot file: payload shorter than header claims");
  s.states.resize(static_cast<Index>(dim), static_cast<Index>(count));
  for (Index j = 0; j < s.states.cols(); ++j) {
    for (Index i = 0; i < s.states.rows(); ++i) s.states(i, j) = r.get<double>();
  }
  if (!r.at_end()) throw IoError("snapshot file: trailing bytes after payload");
  return s;
}

void write_snapshots(const fs::path& path, const SnapshotFile& s) { write_file_atomic(path, encode_snapshots(s)); }
SnapshotFile read_snapshots(const fs::path& path) { return decode_snapshots(read_file(path)); }

namespace {

using json = nlohmann::json;

struct TableEntry {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::uint64_t offset = 0;
  std::uint64_t size = 0;
};

struct IndexMapEntry {
  std::string name;
  PoolState state;
};

const PoolState* pool_state_of(const Module& m) {
  if (m.kind() == ModuleKind::Pool) {
    const auto& p = static_cast<const PoolModule&>(m);
    return p.frozen() ? &p.state() : nullptr;
  }
  if (m.kind() == ModuleKind::Unpool) {
    const auto& u = static_cast<const UnpoolModule&>(m);
    return u.frozen() ? &u.state() : nullptr;
  }
  return nullptr;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& c) {
  json desc;
  desc["type"] = c.type;
  desc["meta"] = c.meta;
  desc["graphs"] = json::array();
  for (const auto& g : c.graphs) {
    json jg;
    jg["role"] = to_string(g.role());
    jg["layers"] = json::array();
    for (Index i = 0; i < g.size(); ++i) {
      const ModuleSpec s = g.layer(i).spec();
      jg["layers"].push_back({{"kind", to_string(s.kind)}, {"attrs", s.attrs}});
    }
    desc["graphs"].push_back(jg);
  }

  std::vector<TableEntry> table;
  std::vector<IndexMapEntry> maps;
  std::vector<double> payload;
  for (std::size_t gi = 0; gi < c.graphs.size(); ++gi) {
    const ModelGraph& g = c.graphs[gi];
    const std::string prefix = "g" + std::to_string(gi) + ".";
    for (Index li = 0; li < g.size(); ++li) {
      const Module& m = g.layer(li);
      const Vec& theta = m.params();
      for (const auto& t : m.tensors()) {
        TableEntry e;
        e.name = prefix + "L" + std::to_string(li) + "." + t.name;
        for (Index d : t.shape) e.shape.push_back(static_cast<std::uint64_t>(d));
        e.offset = payload.size();
        e.size = static_cast<std::uint64_t>(t.size);
        for (Index k = 0; k < t.size; ++k) payload.push_back(theta[t.offset + k]);
        table.push_back(e);
      }
      if (const PoolState* s = pool_state_of(m)) maps.push_back({prefix + "L" + std::to_string(li), *s});
    }
  }
  for (const auto& [name, M] : c.extras) {
    TableEntry e;
    e.name = "x." + name;
    e.shape = {static_cast<std::uint64_t>(M.rows()), static_cast<std::uint64_t>(M.cols())};
    e.offset = payload.size();
    e.size = static_cast<std::uint64_t>(M.size());
    // Row-major, like the snapshot payload.
    for (Index i = 0; i < M.rows(); ++i) {
      for (Index j = 0; j < M.cols(); ++j) payload.push_back(M(i, j));
    }
    table.push_back(e);
  }

  Writer w;
  w.put_bytes(magic("SCAE1"));
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(kEndianTag);
  w.put_string(desc.dump(1));
  w.put<std::uint64_t>(table.size());
  for (const auto& e : table) {
    w.put_string(e.name);
    w.put<std::uint64_t>(e.shape.size());
    for (auto d : e.shape) w.put<std::uint64_t>(d);
    w.put<std::uint64_t>(e.offset);
    w.put<std::uint64_t>(e.size);
  }
  w.put<std::uint64_t>(maps.size());
  for (const auto& m : maps) {
    w.put_string(m.name);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(m.state.kernel));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(m.state.channel_len));
    w.put<std::uint32_t>(m.state.source == PoolSource::Up ? 0 : 1);
    w.put<std::uint64_t>(m.state.index_map.size());
    for (Index v : m.state.index_map) w.put<std::uint64_t>(static_cast<std::uint64_t>(v));
  }
  w.put<std::uint64_t>(payload.size());
  for (double v : payload) w.put<double>(v);
  return std::move(w.str());
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes, "checkpoint");
  check_header(r, "SCAE1", "checkpoint");
  json desc;
  try {
    desc = json::parse(r.get_string());
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint: malformed descriptor: ") + e.what());
  }

  std::vector<TableEntry> table(r.checked_size(r.get<std::uint64_t>()));
  for (auto& e : table) {
    e.name = r.get_string();
    e.shape.resize(r.checked_size(r.get<std::uint64_t>()));
    for (auto& d : e.shape) d = r.get<std::uint64_t>();
    e.offset = r.get<std::uint64_t>();
    e.size = r.get<std::uint64_t>();
  }
  std::map<std::string, PoolState> maps;
  const std::size_t n_maps = r.checked_size(r.get<std::uint64_t>());
  for (std::size_t i = 0; i < n_maps; ++i) {
    const std::string name = r.get_string();
    PoolState s;
    s.kernel = static_cast<Index>(r.get<std::uint64_t>());
    s.channel_len = static_cast<Index>(r.get<std::uint64_t>());
    s.source = r.get<std::uint32_t>() == 0 ? PoolSource::Up : PoolSource::Low;
    s.index_map.resize(r.checked_size(r.get<std::uint64_t>()));
    for (auto& v : s.index_map) v = static_cast<Index>(r.get<std::uint64_t>());
    maps[name] = s;
  }
  std::vector<double> payload(r.checked_size(r.get<std::uint64_t>() * 8) / 8);
  for (auto& v : payload) v = r.get<double>();
  if (!r.at_end()) throw IoError("checkpoint: trailing bytes after payload");

  // Offsets must tile the payload without overlap.
  std::uint64_t expect = 0;
  for (const auto& e : table) {
    if (e.offset != expect) throw IoError("checkpoint: tensor '" + e.name + "' has an unexpected offset");
    expect += e.size;
  }
  if (expect != payload.size()) throw IoError("checkpoint: payload length does not match the tensor table");

  Checkpoint c;
  try {
    c.type = desc.at("type").get<std::string>();
    c.meta = desc.at("meta").get<std::map<std::string, std::string>>();
    std::size_t next = 0;
    for (std::size_t gi = 0; gi < desc.at("graphs").size(); ++gi) {
      const json& jg = desc.at("graphs")[gi];
      ModelGraph g(graph_role_from_string(jg.at("role").get<std::string>()));
      const std::string prefix = "g" + std::to_string(gi) + ".";
      for (std::size_t li = 0; li < jg.at("layers").size(); ++li) {
        const json& jl = jg.at("layers")[li];
        ModuleSpec spec;
        spec.kind = module_kind_from_string(jl.at("kind").get<std::string>());
        spec.attrs = jl.at("attrs").get<std::map<std::string, std::string>>();
        auto m = make_module(spec);
        Vec theta = m->params();
        for (const auto& t : m->tensors()) {
          const std::string name = prefix + "L" + std::to_string(li) + "." + t.name;
          if (next >= table.size() || table[next].name != name || table[next].size != static_cast<std::uint64_t>(t.size)) {
            throw IoError("checkpoint: tensor table does not match layer descriptor at '" + name + "'");
          }
          for (Index k = 0; k < t.size; ++k) theta[t.offset + k] = payload[table[next].offset + static_cast<std::size_t>(k)];
          ++next;
        }
        if (m->num_params() > 0) m->set_params(theta);
        auto it = maps.find(prefix + "L" + std::to_string(li));
        if (it != maps.end()) {
          if (spec.kind == ModuleKind::Pool) static_cast<PoolModule&>(*m).set_state(it->second);
          if (spec.kind == ModuleKind::Unpool) static_cast<UnpoolModule&>(*m).set_state(it->second);
        }
        g.add(std::move(m));
      }
      g.validate();
      c.graphs.push_back(std::move(g));
    }
    for (; next < table.size(); ++next) {
      const auto& e = table[next];
      if (e.name.rfind("x.", 0) != 0 || e.shape.size() != 2) throw IoError("checkpoint: unexpected tensor '" + e.name + "'");
      Mat M(static_cast<Index>(e.shape[0]), static_cast<Index>(e.shape[1]));
      if (static_cast<std::uint64_t>(M.size()) != e.size) throw IoError("checkpoint: shape of '" + e.name + "' disagrees with its size");
      std::size_t k = e.offset;
      for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) M(i, j) = payload[k++];
      }
      c.extras[e.name.substr(2)] = M;
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint: malformed descriptor: ") + e.what());
  }
  return c;
}

void write_checkpoint(const fs::path& path, const Checkpoint& c) { write_file_atomic(path, encode_checkpoint(c)); }
Checkpoint read_checkpoint(const fs::path& path) { return decode_checkpoint(read_file(path)); }

Checkpoint make_checkpoint(const Autoencoder& ae) {
  Checkpoint c;
  c.type = "autoencoder";
  c.graphs.push_back(ae.encoder);
  c.graphs.push_back(ae.decoder);
  return c;
}

Checkpoint make_checkpoint(const PsdBasis& basis) {
  Checkpoint c;
  c.type = "psd";
  c.extras["phi"] = basis.phi;
  return c;
}

Checkpoint make_sympnet_checkpoint(const ModelGraph& phi) {
  Checkpoint c;
  c.type = "sympnet";
  c.graphs.push_back(phi);
  return c;
}

Autoencoder autoencoder_from(const Checkpoint& c) {
  if (c.type != "autoencoder" || c.graphs.size() != 2) throw IoError("checkpoint does not hold an autoencoder");
  Autoencoder ae;
  ae.encoder = c.graphs[0];
  ae.decoder = c.graphs[1];
  if (ae.encoder.role() != GraphRole::Encoder || ae.decoder.role() != GraphRole::Decoder) {
    throw IoError("checkpoint: autoencoder graphs have unexpected roles");
  }
  return ae;
}

PsdBasis psd_basis_from(const Checkpoint& c) {
  auto it = c.extras.find("phi");
  if (c.type != "psd" || it == c.extras.end()) throw IoError("checkpoint does not hold a PSD basis");
  return PsdBasis{it->second};
}

ModelGraph sympnet_from(const Checkpoint& c) {
  if (c.type != "sympnet" || c.graphs.size() != 1) throw IoError("checkpoint does not hold a SympNet");
  return c.graphs[0];
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw ShapeError("csv: row width does not match the header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string matrix_csv(const Mat& M) {
  std::string out;
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out += ',';
      out += format_number(M(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace sympcae
