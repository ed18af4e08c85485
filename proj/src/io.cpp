#include "vmsns/io.hpp"

#include "vmsns/diagnostics.hpp"
#include "vmsns/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vmsns {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw IoError("number formatting failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw IoError("malformed number '" + std::string(text) + "'");
  return x;
}

void write_ledger(const std::filesystem::path& path, const std::vector<EnergyRecord>& ledger) {
  auto out = open_out(path);
  out << kLedgerHeader << '\n';
  for (const auto& r : ledger) {
    out << format_double(r.t) << ',' << format_double(r.ke_fe) << ',' << format_double(r.ke_sub) << ','
        << format_double(r.visc_diss) << ',' << format_double(r.sub_diss) << ',' << format_double(r.power_in) << ','
        << format_double(r.jump_terms) << ',' << format_double(r.imbalance) << '\n';
  }
  finish(out, path);
}

std::vector<EnergyRecord> read_ledger(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ledger " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvariantError(path.string() + ": empty ledger file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kLedgerHeader) throw InvariantError(path.string() + ": ledger header mismatch");
  std::vector<EnergyRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 8)
      throw InvariantError(path.string() + ": line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                           " fields, expected 8");
    EnergyRecord r;
    double* fields[] = {&r.t, &r.ke_fe, &r.ke_sub, &r.visc_diss, &r.sub_diss, &r.power_in, &r.jump_terms, &r.imbalance};
    try {
      for (int i = 0; i < 8; ++i) *fields[i] = parse_double(cells[i]);
    } catch (const IoError& e) {
      throw InvariantError(path.string() + ": line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(r);
  }
  return out;
}

LedgerCheck check_ledger(const std::vector<EnergyRecord>& ledger, double tol) {
  LedgerCheck check;
  auto flag = [&](size_t row, const std::string& what) {
    check.violations.push_back("row " + std::to_string(row + 1) + ": " + what);
  };
  double prev_t = 0.0;
  for (size_t i = 0; i < ledger.size(); ++i) {
    const auto& r = ledger[i];
    const double dt = r.t - prev_t;
    if (!(dt > 0.0)) flag(i, "time is not strictly increasing");
    const double cols[] = {r.ke_fe, r.ke_sub, r.visc_diss, r.sub_diss, r.jump_terms};
    for (double c : cols)
      if (!(c >= 0.0)) {
        flag(i, "negative or non-finite energy/dissipation entry");
        break;
      }
    const double scale = imbalance_scale(r, std::max(dt, 0.0));
    double rel = std::abs(r.imbalance) / scale;
    if (i > 0) {
      const double recomputed = recompute_imbalance(ledger[i - 1].ke_fe, ledger[i - 1].ke_sub, r, dt);
      rel = std::max(rel, std::abs(recomputed) / scale);
    }
    if (!std::isfinite(rel)) rel = std::numeric_limits<double>::infinity();
    check.worst_relative = std::max(check.worst_relative, rel);
    if (!(rel <= tol)) flag(i, "energy imbalance " + format_double(rel) + " exceeds " + format_double(tol));
    prev_t = r.t;
  }
  return check;
}

std::vector<double> cell_subscale_magnitude(const Discretization& disc, const SubscaleField& tilde) {
  const auto& qs = disc.quadrature();
  const int d = disc.dim();
  std::vector<double> out(qs.n_cells(), 0.0);
  for (int c = 0; c < qs.n_cells(); ++c) {
    double num = 0.0, den = 0.0;
    for (int q = 0; q < qs.points_per_cell(); ++q) {
      const int p = qs.point_index(c, q);
      num += qs.weights()[p] * tilde.values.segment(static_cast<Eigen::Index>(p) * d, d).norm();
      den += qs.weights()[p];
    }
    out[c] = den > 0.0 ? num / den : 0.0;
  }
  return out;
}

void write_fields(const std::filesystem::path& path, const Discretization& disc, const StarState& state) {
  const Mesh& m = disc.mesh();
  const FeSpace& v = disc.velocity();
  const FeSpace& p = disc.pressure();
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\nvmsns fields t=" << format_double(state.t) << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << m.n_vertices() << " double\n";
  for (const auto& x : m.vertices()) out << format_double(x[0]) << ' ' << format_double(x[1]) << ' ' << format_double(x[2]) << '\n';
  const int nvc = m.vertices_per_cell();
  out << "CELLS " << m.n_cells() << ' ' << m.n_cells() * (nvc + 1) << '\n';
  for (const auto& c : m.cells()) {
    out << nvc;
    for (int i = 0; i < nvc; ++i) out << ' ' << c[i];
    out << '\n';
  }
  out << "CELL_TYPES " << m.n_cells() << '\n';
  for (int c = 0; c < m.n_cells(); ++c) out << (m.dim() == 2 ? 5 : 10) << '\n';
  out << "POINT_DATA " << m.n_vertices() << "\nVECTORS velocity double\n";
  for (int node = 0; node < m.n_vertices(); ++node) {
    const int dof = v.node_dof(node);
    for (int c = 0; c < 3; ++c) {
      const double val = (dof >= 0 && c < v.components()) ? state.u[v.global_dof(dof, c)] : 0.0;
      out << (c ? " " : "") << format_double(val);
    }
    out << '\n';
  }
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (int node = 0; node < m.n_vertices(); ++node) {
    const int dof = p.node_dof(node);
    out << format_double(dof >= 0 ? state.p[dof] : 0.0) << '\n';
  }
  out << "CELL_DATA " << m.n_cells() << "\nSCALARS subscale_magnitude double 1\nLOOKUP_TABLE default\n";
  for (double s : cell_subscale_magnitude(disc, state.tilde)) out << format_double(s) << '\n';
  finish(out, path);
}

VtkData read_fields(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  VtkData data;
  std::string tok;
  auto fail = [&](const std::string& what) { throw IoError(path.string() + ": " + what); };
  auto next_double = [&]() {
    if (!(in >> tok)) fail("unexpected end of file");
    return parse_double(tok);
  };
  enum class Section { none, point, cell } section = Section::none;
  while (in >> tok) {
    if (tok == "POINTS") {
      size_t n;
      in >> n >> tok;
      data.points.resize(n);
      for (auto& x : data.points)
        for (int d = 0; d < 3; ++d) x[d] = next_double();
    } else if (tok == "CELLS") {
      size_t n, total;
      in >> n >> total;
      data.cells.resize(n);
      for (auto& c : data.cells) {
        int k;
        in >> k;
        c.resize(k);
        for (auto& i : c) in >> i;
      }
    } else if (tok == "CELL_TYPES") {
      size_t n;
      in >> n;
      data.cell_types.resize(n);
      for (auto& t : data.cell_types) in >> t;
    } else if (tok == "POINT_DATA") {
      size_t n;
      in >> n;
      section = Section::point;
    } else if (tok == "CELL_DATA") {
      size_t n;
      in >> n;
      section = Section::cell;
    } else if (tok == "VECTORS") {
      in >> tok >> tok;
      data.velocity.resize(data.points.size());
      for (auto& v : data.velocity)
        for (int d = 0; d < 3; ++d) v[d] = next_double();
    } else if (tok == "SCALARS") {
      std::string name;
      in >> name >> tok >> tok;
      in >> tok >> tok;  // LOOKUP_TABLE default
      auto& target = section == Section::point ? data.pressure : data.subscale;
      target.resize(section == Section::point ? data.points.size() : data.cells.size());
      for (auto& s : target) s = next_double();
    }
    if (!in && !in.eof()) fail("malformed file");
  }
  return data;
}

void write_report(const std::filesystem::path& path, const EquivalenceReport& report) {
  auto out = open_out(path);
  out << kReportHeader << '\n';
  for (const auto& r : report.rows)
    out << r.lemma << ',' << format_double(r.s) << ',' << r.level << ',' << format_double(r.h) << ','
        << format_double(r.value) << ',' << format_double(r.ratio_min) << ',' << format_double(r.ratio_max) << '\n';
  finish(out, path);
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  auto out = open_out(path);
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  finish(out, path);
}

}  // namespace vmsns
