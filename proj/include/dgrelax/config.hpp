#ifndef DGRELAX_CONFIG_HPP_
#define DGRELAX_CONFIG_HPP_

#include "dgrelax/harness.hpp"

#include <toml.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dgrelax {

namespace detail {

inline double toml_number(const toml::node& n, std::string_view what) {
  if (auto v = n.value<double>()) return *v;
  throw std::invalid_argument("config: '" + std::string(what) + "' must be a number");
}

inline Mat2 toml_matrix(const toml::node& n, std::string_view what) {
  const auto* rows = n.as_array();
  if (!rows || rows->size() != 2) throw std::invalid_argument("config: '" + std::string(what) + "' must be [[a, b], [c, d]]");
  Mat2 M;
  for (int i = 0; i < 2; ++i) {
    const auto* row = (*rows)[i].as_array();
    if (!row || row->size() != 2) throw std::invalid_argument("config: '" + std::string(what) + "' must be [[a, b], [c, d]]");
    for (int j = 0; j < 2; ++j) M(i, j) = toml_number((*row)[j], what);
  }
  return M;
}

template <class T>
void read(const toml::table& t, std::string_view key, T& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if constexpr (std::is_same_v<T, bool>) {
    if (auto v = n->value<bool>()) out = *v;
    else throw std::invalid_argument("config: '" + std::string(key) + "' must be a boolean");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = n->value<std::string>()) out = *v;
    else throw std::invalid_argument("config: '" + std::string(key) + "' must be a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (auto v = n->value<std::int64_t>()) out = static_cast<T>(*v);
    else throw std::invalid_argument("config: '" + std::string(key) + "' must be an integer");
  } else {
    out = toml_number(*n, key);
  }
}

inline const toml::table* section(const toml::table& root, std::string_view name) {
  const toml::node* n = root.get(name);
  if (!n) return nullptr;
  if (const auto* t = n->as_table()) return t;
  throw std::invalid_argument("config: [" + std::string(name) + "] must be a table");
}

} // namespace detail

/// Builds a RunConfig from a parsed TOML document. Keys absent from the
/// document keep the experiment defaults; relative output paths are resolved
/// against `base_dir`.
inline RunConfig parse_config(const toml::table& root, const std::filesystem::path& base_dir = {}) {
  using detail::read;
  std::string kind = "custom";
  read(root, "experiment", kind);
  RunConfig c = default_config(parse_experiment(kind));
  read(root, "name", c.name);
  std::string out = c.output_dir.string();
  read(root, "output_dir", out);
  c.output_dir = std::filesystem::path(out).is_absolute() || base_dir.empty() ? std::filesystem::path(out) : base_dir / out;

  if (const auto* m = detail::section(root, "mesh")) {
    read(*m, "nx", c.nx);
    read(*m, "ny", c.ny);
    if (const auto* b = m->get("bbox")) {
      const auto* arr = b->as_array();
      if (!arr || arr->size() != 4) throw std::invalid_argument("config: mesh.bbox must be [x0, y0, x1, y1]");
      c.bbox = {detail::toml_number((*arr)[0], "bbox"), detail::toml_number((*arr)[1], "bbox"),
                detail::toml_number((*arr)[2], "bbox"), detail::toml_number((*arr)[3], "bbox")};
    }
  }
  if (const auto* s = detail::section(root, "space")) {
    read(*s, "degree", c.degree);
    read(*s, "components", c.components);
  }
  if (const auto* m = detail::section(root, "model")) {
    read(*m, "id", c.model.id);
    read(*m, "b0", c.model.b0);
    read(*m, "squared_first_factor", c.model.squared_first_factor);
    if (const auto* t = m->get("target")) c.model.target = detail::toml_matrix(*t, "model.target");
  }
  if (const auto* b = detail::section(root, "boundary"))
    if (const auto* f = b->get("F")) c.boundary_gradient = detail::toml_matrix(*f, "boundary.F");
  if (const auto* e = detail::section(root, "energy")) {
    std::string s;
    if (e->get("formulation")) {
      read(*e, "formulation", s);
      c.energy.formulation = parse_formulation(s);
    }
    if (e->get("penalty")) {
      read(*e, "penalty", s);
      c.energy.penalty = parse_penalty(s);
    }
    read(*e, "alpha", c.energy.alpha);
    read(*e, "stable_rewrite", c.energy.stable_rewrite);
    read(*e, "eps_pen", c.energy.eps_pen);
    read(*e, "bulk_degree", c.energy.bulk_degree);
    read(*e, "edge_degree", c.energy.edge_degree);
    if (const auto* p = e->get("p")) {
      const double want = detail::toml_number(*p, "energy.p");
      const double have = std::visit([](const auto& mm) { return mm.growth_exponent(); }, make_model(c.model));
      if (want != have)
        throw std::invalid_argument("config: energy.p = " + std::to_string(want) + " does not match the model exponent " +
                                    std::to_string(have));
    }
  }
  if (const auto* m = detail::section(root, "minimizer")) {
    read(*m, "max_iterations", c.minimizer.max_iterations);
    read(*m, "g_tol", c.minimizer.g_tol);
    read(*m, "f_tol", c.minimizer.f_tol);
    read(*m, "stall_window", c.minimizer.stall_window);
    read(*m, "memory", c.minimizer.memory);
    read(*m, "armijo_c1", c.minimizer.armijo_c1);
    read(*m, "backtrack_factor", c.minimizer.backtrack_factor);
    read(*m, "max_backtracks", c.minimizer.max_backtracks);
    read(*m, "seed", c.minimizer.seed);
  }
  if (const auto* s = detail::section(root, "sweep")) {
    if (const auto* a = s->get("alpha")) {
      const auto* arr = a->as_array();
      if (!arr) throw std::invalid_argument("config: sweep.alpha must be an array");
      c.alpha_sweep.clear();
      for (const auto& v : *arr) c.alpha_sweep.push_back(detail::toml_number(v, "sweep.alpha"));
    }
    if (const auto* r = s->get("resolutions")) {
      const auto* arr = r->as_array();
      if (!arr) throw std::invalid_argument("config: sweep.resolutions must be an array");
      c.resolution_sweep.clear();
      for (const auto& v : *arr) {
        if (auto n = v.value<std::int64_t>()) {
          c.resolution_sweep.emplace_back(static_cast<int>(*n), static_cast<int>(*n));
          continue;
        }
        const auto* pair = v.as_array();
        if (!pair || pair->size() != 2 || !(*pair)[0].value<std::int64_t>() || !(*pair)[1].value<std::int64_t>())
          throw std::invalid_argument("config: sweep.resolutions entries must be n or [nx, ny]");
        c.resolution_sweep.emplace_back(static_cast<int>(*(*pair)[0].value<std::int64_t>()),
                                        static_cast<int>(*(*pair)[1].value<std::int64_t>()));
      }
    }
    if (const auto* p = s->get("penalties")) {
      const auto* arr = p->as_array();
      if (!arr) throw std::invalid_argument("config: sweep.penalties must be an array");
      c.penalty_sweep.clear();
      for (const auto& v : *arr) {
        auto str = v.value<std::string>();
        if (!str) throw std::invalid_argument("config: sweep.penalties entries must be strings");
        c.penalty_sweep.push_back(parse_penalty(*str));
      }
    }
  }
  if (const auto* q = detail::section(root, "qc")) {
    if (const auto* f = q->get("F")) c.qc.F = detail::toml_matrix(*f, "qc.F");
    read(*q, "resolution", c.qc.resolution);
    read(*q, "restarts", c.qc.restarts);
    read(*q, "amplitude", c.qc.amplitude);
    read(*q, "seed", c.qc.seed);
  }
  if (const auto* o = detail::section(root, "output")) {
    read(*o, "vtk", c.vtk);
    read(*o, "profile_samples", c.profile_samples);
  }
  c.validate();
  return c;
}

inline RunConfig parse_config_string(std::string_view text, const std::filesystem::path& base_dir = {}) {
  try {
    return parse_config(toml::parse(text), base_dir);
  } catch (const toml::parse_error& e) {
    throw std::invalid_argument(std::string("config: TOML syntax error: ") + std::string(e.description()));
  }
}

/// Relative output paths are taken relative to the working directory.
inline RunConfig load_config(const std::filesystem::path& file) {
  try {
    return parse_config(toml::parse_file(file.string()));
  } catch (const toml::parse_error& e) {
    throw std::invalid_argument("config: " + file.string() + ": " + std::string(e.description()));
  }
}

} // namespace dgrelax

#endif
