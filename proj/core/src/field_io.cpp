#include "hypf/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace hypf {

static_assert(std::endian::native == std::endian::little, "field container assumes little endian");

namespace {

constexpr char kMagic[4] = {'H', 'Y', 'P', 'F'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw InvalidArgument("truncated field file");
  return v;
}

}  // namespace

void write_field(std::ostream& out, const NodalRecord& rec) {
  if (rec.data.size() != rec.grid.node_count() * std::size_t(rec.components)) {
    throw InvalidArgument("record size does not match grid and component count");
  }
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kFieldFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(rec.grid.nx()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(rec.grid.ny()));
  put<double>(out, rec.grid.lx());
  put<double>(out, rec.grid.ly());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(rec.components));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(rec.deformation_components));
  out.write(reinterpret_cast<const char*>(rec.data.data()),
            static_cast<std::streamsize>(rec.data.size() * sizeof(double)));
  if (!out) throw InvalidArgument("failed to write field data");
}

NodalRecord read_field(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw InvalidArgument("not a HYPF field file");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kFieldFormatVersion) {
    throw InvalidArgument("unsupported field file version " + std::to_string(version));
  }
  const auto nx = get<std::uint32_t>(in);
  const auto ny = get<std::uint32_t>(in);
  const auto lx = get<double>(in);
  const auto ly = get<double>(in);
  const auto comps = get<std::uint32_t>(in);
  const auto defc = get<std::uint32_t>(in);
  if (nx > 1u << 15 || ny > 1u << 15 || comps == 0 || comps > 2 + kMaxComponents ||
      (defc != 0 && defc != 2) || defc > comps) {
    throw InvalidArgument("corrupt field file header");
  }
  NodalRecord rec{Grid(static_cast<int>(nx), static_cast<int>(ny), lx, ly), static_cast<int>(comps),
                  static_cast<int>(defc), {}};
  rec.data.resize(rec.grid.node_count() * comps);
  if (!in.read(reinterpret_cast<char*>(rec.data.data()),
               static_cast<std::streamsize>(rec.data.size() * sizeof(double)))) {
    throw InvalidArgument("truncated field file");
  }
  return rec;
}

void write_field(const std::filesystem::path& path, const NodalRecord& rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  write_field(out, rec);
}

NodalRecord read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return read_field(in);
}

NodalRecord pack_state(const DeformationField& def, const PhaseField& z) {
  if (!(def.grid() == z.grid())) throw InvalidArgument("fields live on different grids");
  const int h = z.components();
  NodalRecord rec{def.grid(), 2 + h, 2, {}};
  rec.data.reserve(def.grid().node_count() * std::size_t(2 + h));
  for (std::size_t n = 0; n < def.grid().node_count(); ++n) {
    rec.data.push_back(def[n].x());
    rec.data.push_back(def[n].y());
    for (int i = 0; i < h; ++i) rec.data.push_back(z.data()[n * h + i]);
  }
  return rec;
}

NodalRecord pack_phase(const PhaseField& z) {
  return NodalRecord{z.grid(), z.components(), 0, z.data()};
}

DeformationField unpack_deformation(const NodalRecord& rec) {
  if (rec.deformation_components != 2) throw InvalidArgument("record holds no deformation");
  const auto& grid = rec.grid;
  std::vector<Vec2> values(grid.node_count());
  std::vector<std::uint8_t> mask(grid.node_count(), 0);
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    values[n] = Vec2(rec.data[n * rec.components], rec.data[n * rec.components + 1]);
    mask[n] = grid.on_boundary(n) ? 1 : 0;
  }
  return DeformationField(grid, values, std::move(mask), values);
}

PhaseField unpack_phase(const NodalRecord& rec) {
  const int h = rec.components - rec.deformation_components;
  if (h < 1) throw InvalidArgument("record holds no phase field");
  PhaseField z(rec.grid, h);
  for (std::size_t n = 0; n < rec.grid.node_count(); ++n) {
    for (int i = 0; i < h; ++i) {
      z.data()[n * h + i] = rec.data[n * rec.components + rec.deformation_components + i];
    }
  }
  return z;
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, int precision) {
  const auto old = out.precision(precision);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  out.precision(old);
}

}  // namespace hypf
