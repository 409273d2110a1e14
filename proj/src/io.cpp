#include "stabcert/io.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <openssl/evp.h>

namespace stabcert {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

Json to_json(const GridDomain& d) {
  return Json{{"dim", d.dim()},
              {"half_width", d.half_width()},
              {"points_per_axis", d.points_per_axis()},
              {"periodic", d.periodic()}};
}

GridDomain domain_from_json(const Json& j) {
  try {
    return GridDomain::make(j.at("dim").get<int>(),
                            j.at("half_width").get<double>(),
                            j.at("points_per_axis").get<int>(),
                            j.at("periodic").get<bool>());
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidArgument,
         std::string("malformed domain header: ") + e.what());
  }
}

Json to_json(const GridFunction& f) {
  return Json{{"domain", to_json(f.domain)}, {"values", f.values}};
}

GridFunction grid_function_from_json(const Json& j) {
  const GridDomain d = domain_from_json(j.at("domain"));
  try {
    return GridFunction(d, j.at("values").get<std::vector<double>>());
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidArgument,
         std::string("malformed grid function: ") + e.what());
  }
}

namespace {

template <class T>
void put(std::ostream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& i) {
  T v{};
  i.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!i) fail(ErrorCode::kIo, "truncated grid function record");
  return v;
}

}  // namespace

void write_binary(std::ostream& out, const GridFunction& f) {
  out.write("STGF", 4);
  put(out, static_cast<std::uint32_t>(f.domain.dim()));
  put(out, f.domain.half_width());
  put(out, static_cast<std::uint32_t>(f.domain.points_per_axis()));
  put(out, static_cast<std::uint8_t>(f.domain.periodic()));
  put(out, static_cast<std::uint64_t>(f.size()));
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!out) fail(ErrorCode::kIo, "failed writing grid function");
}

GridFunction read_grid_function_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "STGF")
    fail(ErrorCode::kIo, "not a grid function record");
  const auto dim = get<std::uint32_t>(in);
  const auto R = get<double>(in);
  const auto m = get<std::uint32_t>(in);
  const auto periodic = get<std::uint8_t>(in);
  const auto n = get<std::uint64_t>(in);
  const GridDomain d = GridDomain::make(static_cast<int>(dim), R,
                                        static_cast<int>(m), periodic != 0);
  if (n != d.size()) fail(ErrorCode::kIo, "grid function length mismatch");
  std::vector<double> values(n);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) fail(ErrorCode::kIo, "truncated grid function record");
  return GridFunction(d, std::move(values));
}

Json to_json(const SetIndicator& e) {
  std::vector<std::size_t> runs;
  std::uint8_t current = 0;
  std::size_t length = 0;
  for (auto c : e.cells()) {
    if (c == current) {
      ++length;
    } else {
      runs.push_back(length);
      current = c;
      length = 1;
    }
  }
  runs.push_back(length);
  return Json{{"domain", to_json(e.domain())}, {"rle", runs}};
}

SetIndicator set_from_json(const Json& j) {
  const GridDomain d = domain_from_json(j.at("domain"));
  std::vector<std::uint8_t> cells;
  cells.reserve(d.size());
  std::uint8_t current = 0;
  for (const auto& run : j.at("rle")) {
    const auto n = run.get<std::size_t>();
    require(cells.size() + n <= d.size(), "run-length data overflows grid");
    cells.insert(cells.end(), n, current);
    current ^= 1;
  }
  require(cells.size() == d.size(), "run-length data does not cover grid");
  return SetIndicator(d, std::move(cells));
}

Json to_json(const OperatorSpec& spec) {
  struct V {
    Json operator()(const FractionalLaplacian& f) const {
      return Json{{"kind", "frac"}, {"s", f.s}, {"c", f.c}};
    }
    Json operator()(const ShiftedHermite& h) const {
      return Json{{"kind", "hermite"}, {"c", h.c}};
    }
    Json operator()(const Schrodinger& s) const {
      return Json{
          {"kind", "schrodinger"},
          {"condition", s.condition == PotentialCondition::kI ? "I" : "II"},
          {"delta", s.delta},
          {"potential", to_json(s.potential)}};
    }
  };
  return std::visit(V{}, spec);
}

OperatorSpec operator_from_json(const Json& j, const GridDomain& domain) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    OperatorSpec spec;
    if (kind == "frac") {
      spec = FractionalLaplacian{j.value("s", 1.0), j.value("c", 0.0)};
    } else if (kind == "hermite") {
      spec = ShiftedHermite{j.value("c", 0.0)};
    } else if (kind == "schrodinger") {
      const auto cond = j.value("condition", std::string("II"));
      require(cond == "I" || cond == "II", "condition must be I or II");
      Schrodinger s{grid_function_from_json(j.at("potential")),
                    cond == "I" ? PotentialCondition::kI
                                : PotentialCondition::kII,
                    j.value("delta", 0.5)};
      spec = std::move(s);
    } else {
      fail(ErrorCode::kInvalidArgument, "unknown operator kind '" + kind + "'");
    }
    validate(spec, domain);
    return spec;
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidArgument,
         std::string("malformed operator: ") + e.what());
  }
}

std::string content_hash(const Json& j) {
  const std::string text = j.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    fail(ErrorCode::kNumerical, "SHA-256 failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i)
    out << std::hex << std::setw(2) << std::setfill('0')
        << static_cast<int>(digest[i]);
  return out.str();
}

std::string content_hash(const OperatorSpec& spec, const GridDomain& domain) {
  return content_hash(
      Json{{"operator", to_json(spec)}, {"domain", to_json(domain)}});
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::random_device rd;
  const fs::path tmp =
      target.parent_path() /
      (target.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) fail(ErrorCode::kIo, "failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    fail(ErrorCode::kIo, "cannot rename onto " + path + ": " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace stabcert
