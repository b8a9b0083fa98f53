#include "tvflow/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "tvflow/colorspace.hpp"
#include "tvflow/datum.hpp"

namespace tvflow {

namespace {

using nlohmann::json;

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& in, void* p, std::size_t n, const char* what) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in) throw ConfigError(std::string("container truncated while reading ") + what);
}

void write_u32(std::ofstream& out, std::uint32_t v) { write_bytes(out, &v, 4); }
std::uint32_t read_u32(std::ifstream& in, const char* what) {
  std::uint32_t v = 0;
  read_bytes(in, &v, 4, what);
  return v;
}

}  // namespace

void write_field(const std::filesystem::path& path, const Field& u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  const GridDomain& dom = *u.domain;
  out.write("TVF1", 4);
  write_u32(out, static_cast<std::uint32_t>(dom.dim()));
  for (int d = 0; d < 3; ++d) write_u32(out, static_cast<std::uint32_t>(dom.extents()[d]));
  const double h = dom.spacing();
  write_bytes(out, &h, 8);
  write_u32(out, dom.boundary() == Boundary::Periodic ? 1u : 0u);
  write_u32(out, static_cast<std::uint32_t>(u.components()));
  const std::string& id = u.manifold->name();
  write_u32(out, static_cast<std::uint32_t>(id.size()));
  write_bytes(out, id.data(), id.size());
  const std::uint8_t has_mask = dom.has_mask() ? 1 : 0;
  write_bytes(out, &has_mask, 1);
  if (has_mask) write_bytes(out, dom.mask().data(), dom.cell_count());
  write_bytes(out, u.values.data(), u.values.size() * sizeof(double));
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

Field read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open field container '" + path.string() + "'");
  char magic[4];
  read_bytes(in, magic, 4, "magic");
  if (std::memcmp(magic, "TVF1", 4) != 0)
    throw UnsupportedFormat("'" + path.string() + "' is not a TVF1 container");
  const int m = static_cast<int>(read_u32(in, "dim"));
  if (m < 1 || m > 3) throw ConfigError("container: bad dimension");
  int n[3];
  for (int d = 0; d < 3; ++d) n[d] = static_cast<int>(read_u32(in, "extents"));
  double h = 0.0;
  read_bytes(in, &h, 8, "spacing");
  const Boundary boundary = read_u32(in, "boundary") ? Boundary::Periodic : Boundary::NeumannReflect;
  const int ncomp = static_cast<int>(read_u32(in, "components"));
  const std::uint32_t idlen = read_u32(in, "manifold id length");
  if (idlen > 256) throw ConfigError("container: oversized manifold id");
  std::string id(idlen, '\0');
  read_bytes(in, id.data(), idlen, "manifold id");
  std::uint8_t has_mask = 0;
  read_bytes(in, &has_mask, 1, "mask flag");
  std::vector<int> dims(n, n + m);
  std::shared_ptr<const GridDomain> dom;
  const std::size_t q = static_cast<std::size_t>(n[0]) * (m > 1 ? n[1] : 1) * (m > 2 ? n[2] : 1);
  if (has_mask) {
    std::vector<std::uint8_t> mask(q);
    read_bytes(in, mask.data(), q, "mask");
    dom = std::make_shared<GridDomain>(dims, h, boundary, std::move(mask));
  } else {
    dom = std::make_shared<GridDomain>(dims, h, boundary);
  }
  std::shared_ptr<const Manifold> man = make_manifold(id);
  if (man->ambient_dim() != ncomp)
    throw ConfigError("container: component count does not match manifold '" + id + "'");
  Field u = make_field(dom, man);
  read_bytes(in, u.values.data(), u.values.size() * sizeof(double), "payload");
  return u;
}

void write_field_csv(const std::filesystem::path& path, const Field& u) {
  if (u.domain->dim() != 1) throw ConfigError("field csv output is for 1D fields");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << "x";
  for (std::size_t k = 0; k < u.components(); ++k) out << ",u" << k;
  out << "\n";
  out.precision(17);
  for (std::size_t c = 0; c < u.domain->cell_count(); ++c) {
    out << (static_cast<double>(c) + 0.5) * u.domain->spacing();
    for (std::size_t k = 0; k < u.components(); ++k) out << "," << u.cell(c)[k];
    out << "\n";
  }
}

void write_mask(const std::filesystem::path& path, const MaskFile& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out.write("TVM1", 4);
  write_u32(out, static_cast<std::uint32_t>(m.dims.size()));
  for (std::size_t d = 0; d < 3; ++d)
    write_u32(out, d < m.dims.size() ? static_cast<std::uint32_t>(m.dims[d]) : 1u);
  write_bytes(out, &m.h, 8);
  write_bytes(out, m.mask.data(), m.mask.size());
}

MaskFile read_mask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open mask '" + path.string() + "'");
  char magic[4];
  read_bytes(in, magic, 4, "magic");
  if (std::memcmp(magic, "TVM1", 4) != 0)
    throw UnsupportedFormat("'" + path.string() + "' is not a TVM1 mask");
  MaskFile m;
  const int dim = static_cast<int>(read_u32(in, "dim"));
  if (dim < 1 || dim > 3) throw ConfigError("mask: bad dimension");
  int n[3];
  for (int d = 0; d < 3; ++d) n[d] = static_cast<int>(read_u32(in, "extents"));
  m.dims.assign(n, n + dim);
  read_bytes(in, &m.h, 8, "spacing");
  std::size_t q = 1;
  for (int d = 0; d < dim; ++d) q *= static_cast<std::size_t>(n[d]);
  m.mask.resize(q);
  read_bytes(in, m.mask.data(), q, "mask payload");
  return m;
}

void write_diagnostics_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << "t,energy,dissipation_acc,sup_v,ball_radius,f_mu\n";
  out.precision(17);
  for (const auto& row : traj.rows) {
    out << row.t << "," << row.energy << "," << row.dissipation_acc << "," << row.sup_v << ","
        << row.ball_radius << "," << row.f_mu << "\n";
  }
}

void write_run_meta(const std::filesystem::path& path, const Trajectory& traj,
                    const std::string& config_echo) {
  json meta;
  if (!config_echo.empty()) {
    meta["config"] = json::parse(config_echo, nullptr, false);
    if (meta["config"].is_discarded()) meta["config"] = config_echo;
  }
  meta["snapshots"] = traj.snapshots.size();
  json segs = json::array();
  for (const auto& s : traj.segments) segs.push_back({{"eps", s[0]}, {"t0", s[1]}, {"t1", s[2]}});
  meta["segments"] = segs;
  if (traj.extinction_time) meta["extinction_time"] = *traj.extinction_time;
  if (std::isfinite(traj.t_dagger)) meta["t_dagger"] = traj.t_dagger;
  meta["clamped_to_existence_window"] = traj.clamped_to_existence_window;
  if (traj.config.eps_schedule.size() > 1) {
    // L2 movement of the state across each continuation segment; shrinking
    // values suggest the eps continuation has converged. A heuristic only:
    // no rate is attached to it.
    json cauchy = json::array();
    for (const auto& seg : traj.segments) {
      const Field* first = nullptr;
      const Field* last = nullptr;
      for (std::size_t i = 0; i < traj.rows.size(); ++i) {
        if (traj.rows[i].eps != seg[0]) continue;
        if (!first) first = &traj.snapshots[i].u;
        last = &traj.snapshots[i].u;
      }
      if (!first || !last) continue;
      double acc = 0.0;
      for (std::size_t k = 0; k < first->values.size(); ++k) {
        const double d = last->values[k] - first->values[k];
        acc += d * d;
      }
      cauchy.push_back({{"eps", seg[0]},
                        {"l2_change", std::sqrt(first->domain->cell_measure() * acc)}});
    }
    meta["continuation_l2_changes"] = cauchy;
    meta["note"] = "continuation_l2_changes is a heuristic convergence monitor, not a bound";
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << meta.dump(2) << "\n";
}

void append_report_jsonl(const std::filesystem::path& path, const AuditReport& rep) {
  json j;
  j["name"] = rep.name;
  j["pass"] = rep.pass;
  j["measured"] = rep.measured;
  j["bound"] = rep.bound;
  j["tolerance"] = rep.tolerance;
  j["violation_times"] = rep.violation_times;
  j["details"] = rep.details;
  std::ofstream out(path, std::ios::app);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << j.dump() << "\n";
}

namespace {

const json& require_key(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
  return j.at(key);
}

double require_number(const json& j, const char* key) {
  const json& v = require_key(j, key);
  if (!v.is_number()) throw ConfigError(std::string("config: key '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

RunConfig parse_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config '" + path.string() + "' is not valid JSON");

  RunConfig cfg;
  cfg.config_echo = text;
  cfg.manifold_id = require_key(j, "manifold").get<std::string>();
  for (const auto& d : require_key(j, "dims")) cfg.dims.push_back(d.get<int>());
  cfg.h = require_number(j, "h");
  const std::string b = j.value("boundary", std::string("neumann"));
  if (b == "neumann")
    cfg.boundary = Boundary::NeumannReflect;
  else if (b == "periodic")
    cfg.boundary = Boundary::Periodic;
  else
    throw ConfigError("config: key 'boundary' must be 'neumann' or 'periodic'");
  cfg.mask_path = j.value("mask", std::string());

  if (j.contains("eps_schedule")) {
    for (const auto& seg : j.at("eps_schedule")) {
      if (!seg.is_array() || seg.size() != 2)
        throw ConfigError("config: key 'eps_schedule' must hold [eps, duration] pairs");
      cfg.flow.eps_schedule.emplace_back(seg[0].get<double>(), seg[1].get<double>());
    }
    cfg.flow.eps = cfg.flow.eps_schedule.front().first;
  } else {
    cfg.flow.eps = require_number(j, "eps");
  }
  cfg.flow.t_end = require_number(j, "t_end");
  cfg.flow.dt_safety = j.value("dt_safety", 0.45);
  cfg.flow.snapshot_stride = j.value("snapshot_stride", std::size_t{100});
  const std::string form = j.value("rhs_form", std::string("project"));
  if (form == "project")
    cfg.flow.rhs_form = RhsForm::Project;
  else if (form == "second_fundamental")
    cfg.flow.rhs_form = RhsForm::SecondFundamental;
  else
    throw ConfigError("config: key 'rhs_form' must be 'project' or 'second_fundamental'");
  cfg.flow.allow_past_existence_window = j.value("allow_past_existence_window", false);
  cfg.flow.stop_at_extinction = j.value("stop_at_extinction", true);

  const json& datum = require_key(j, "datum");
  if (datum.contains("file")) {
    cfg.datum_file = datum.at("file").get<std::string>();
  } else if (datum.contains("generator")) {
    cfg.generator = datum.at("generator").get<std::string>();
    if (datum.contains("params"))
      for (const auto& p : datum.at("params")) cfg.generator_params.push_back(p.get<double>());
    if (datum.contains("p0"))
      for (const auto& p : datum.at("p0")) cfg.p0.push_back(p.get<double>());
  } else if (datum.contains("image")) {
    cfg.datum_image = datum.at("image").get<std::string>();
    cfg.datum_colorspace = datum.value("colorspace", std::string("chromaticity_sphere"));
  } else {
    throw ConfigError("config: key 'datum' needs 'file', 'generator' or 'image'");
  }
  if (j.contains("p0") && cfg.p0.empty())
    for (const auto& p : j.at("p0")) cfg.p0.push_back(p.get<double>());

  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.out_dir = j.value("out", std::string("out"));
  return cfg;
}

PreparedRun prepare_run(const RunConfig& cfg) {
  PreparedRun run;
  std::shared_ptr<const Manifold> man = make_manifold(cfg.manifold_id);

  std::shared_ptr<const GridDomain> dom;
  if (!cfg.mask_path.empty()) {
    MaskFile mf = read_mask(cfg.mask_path);
    if (mf.dims != cfg.dims || mf.h != cfg.h)
      throw ConfigError("config: key 'mask' geometry does not match 'dims'/'h'");
    dom = std::make_shared<GridDomain>(cfg.dims, cfg.h, cfg.boundary, std::move(mf.mask));
  } else {
    dom = std::make_shared<GridDomain>(cfg.dims, cfg.h, cfg.boundary);
  }

  if (!cfg.datum_file.empty()) {
    Field u = read_field(cfg.datum_file);
    if (u.manifold->name() != man->name())
      throw ConfigError("config: datum manifold '" + u.manifold->name() +
                        "' does not match key 'manifold'");
    if (!u.domain->same_layout(*dom))
      throw ConfigError("config: datum grid does not match keys 'dims'/'h'/'boundary'");
    run.domain = u.domain;
    run.manifold = u.manifold;
    run.u0 = std::move(u);
    return run;
  }

  if (!cfg.datum_image.empty()) {
    const Image img = read_image(cfg.datum_image);
    if (dom->dim() != 2 || dom->extents()[0] != img.width || dom->extents()[1] != img.height)
      throw ConfigError("config: keys 'dims' must match the datum image geometry");
    Field u0;
    if (cfg.datum_colorspace == "chromaticity_sphere")
      u0 = image_to_chromaticity(img, dom).chroma;
    else if (cfg.datum_colorspace == "lch_cylinder")
      u0 = image_to_lch(img, dom);
    else
      throw ConfigError("config: datum key 'colorspace' must be chromaticity_sphere or lch_cylinder");
    if (u0.manifold->name() != man->name())
      throw ConfigError("config: key 'manifold' must be '" + u0.manifold->name() +
                        "' for this colorspace");
    run.domain = dom;
    run.manifold = u0.manifold;
    run.u0 = std::move(u0);
    return run;
  }

  std::vector<double> p0 = cfg.p0.empty() ? canonical_point(*man) : cfg.p0;
  if (p0.size() != static_cast<std::size_t>(man->ambient_dim()))
    throw ConfigError("config: key 'p0' has wrong dimension");
  const auto params = cfg.generator_params;
  auto param = [&](std::size_t i, double fallback) {
    return i < params.size() ? params[i] : fallback;
  };
  Field u0;
  if (cfg.generator == "arc1d" || cfg.generator == "bump2d" || cfg.generator == "noise")
    run.reference_point = p0;
  if (cfg.generator == "step1d") {
    u0 = datum_step_1d(dom, man, param(0, 0.5));
  } else if (cfg.generator == "arc1d") {
    const auto dir = canonical_tangent(*man, std::span<const double>(p0.data(), p0.size()));
    u0 = datum_arc_1d(dom, man, std::span<const double>(p0.data(), p0.size()),
                      std::span<const double>(dir.data(), dir.size()), param(0, 0.5));
  } else if (cfg.generator == "bump2d") {
    const auto dir = canonical_tangent(*man, std::span<const double>(p0.data(), p0.size()));
    u0 = datum_bump_2d(dom, man, std::span<const double>(p0.data(), p0.size()),
                       std::span<const double>(dir.data(), dir.size()), param(0, 0.3),
                       param(1, 0.8));
  } else if (cfg.generator == "noise") {
    u0 = datum_noise(dom, man, std::span<const double>(p0.data(), p0.size()), param(0, 0.1),
                     cfg.seed);
  } else if (cfg.generator == "torus_wrap") {
    u0 = datum_torus_wrap(dom, man, static_cast<int>(param(0, 1.0)), param(1, 0.0), param(2, 0.0),
                          static_cast<int>(param(3, 2.0)));
  } else {
    throw ConfigError("config: unknown datum generator '" + cfg.generator + "'");
  }
  run.domain = dom;
  run.manifold = man;
  run.u0 = std::move(u0);
  return run;
}

}  // namespace tvflow
