#include "momeq/studies/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "momeq/errors.hpp"

namespace momeq::studies {

using nlohmann::json;

namespace {

template <typename T>
void read_value(const json& node, const std::string& path, T& target) {
  try {
    target = node.get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument("config: wrong type for '" + path + "'");
  }
}

template <typename Handler>
void for_each_key(const json& node, const std::string& path, Handler&& handle) {
  if (!node.is_object()) throw InvalidArgument("config: '" + path + "' must be an object");
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!handle(it.key(), it.value(), key)) throw InvalidArgument("config: unknown key '" + key + "'");
  }
}

}  // namespace

StudyConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("config is not valid JSON: ") + e.what());
  }

  StudyConfig c;
  for_each_key(root, "", [&](const std::string& key, const json& v, const std::string& path) {
    if (key == "mesh") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "d") read_value(x, p, c.mesh.dimension);
        else if (k == "n") read_value(x, p, c.mesh.elements);
        else if (k == "degree") read_value(x, p, c.mesh.degree);
        else if (k == "quadrature_refinement") read_value(x, p, c.mesh.quadrature_refinement);
        else return false;
        return true;
      });
    } else if (key == "sparse") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "h0") read_value(x, p, c.sparse.base_step);
        else if (k == "L") read_value(x, p, c.sparse.level);
        else return false;
        return true;
      });
    } else if (key == "kernel") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "kind") {
          std::string name;
          read_value(x, p, name);
          c.kernel.kind = kernel_kind_from_string(name);
        } else if (k == "sigma") read_value(x, p, c.kernel.sigma);
        else if (k == "correlation_length") read_value(x, p, c.kernel.correlation_length);
        else if (k == "gamma") read_value(x, p, c.kernel.holder_exponent);
        else return false;
        return true;
      });
    } else if (key == "recursion") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "K") read_value(x, p, c.order);
        else return false;
        return true;
      });
    } else if (key == "mc") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "samples") read_value(x, p, c.mc.samples);
        else if (k == "seed") read_value(x, p, c.mc.seed);
        else if (k == "antithetic") read_value(x, p, c.mc.antithetic);
        else if (k == "jitter") read_value(x, p, c.mc.jitter);
        else return false;
        return true;
      });
    } else if (key == "sweeps") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "n") read_value(x, p, c.sweeps.elements);
        else if (k == "L") read_value(x, p, c.sweeps.levels);
        else if (k == "sigma") read_value(x, p, c.sweeps.sigmas);
        else if (k == "K") read_value(x, p, c.sweeps.orders);
        else return false;
        return true;
      });
    } else if (key == "reference") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "n") read_value(x, p, c.reference.elements);
        else if (k == "L") read_value(x, p, c.reference.level);
        else if (k == "file") read_value(x, p, c.reference.file);
        else return false;
        return true;
      });
    } else if (key == "validate") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "isserlis_samples") read_value(x, p, c.validate.isserlis_samples);
        else if (k == "remainder_samples") read_value(x, p, c.validate.remainder_samples);
        else if (k == "full_tensor_n") read_value(x, p, c.validate.full_tensor_elements);
        else if (k == "full_tensor_L") read_value(x, p, c.validate.full_tensor_level);
        else return false;
        return true;
      });
    } else if (key == "caps") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "max_solves") read_value(x, p, c.caps.max_solves);
        else if (k == "max_pairing_order") read_value(x, p, c.caps.max_pairing_order);
        else return false;
        return true;
      });
    } else if (key == "source") {
      read_value(v, path, c.source);
    } else if (key == "threads") {
      read_value(v, path, c.threads);
    } else if (key == "write_table") {
      read_value(v, path, c.write_table);
    } else {
      return false;
    }
    return true;
  });
  validate_config(c);
  return c;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate_config(const StudyConfig& c) {
  if (c.mesh.dimension != 1) throw InvalidArgument("config: only mesh.d = 1 is supported");
  if (c.mesh.elements < 2) throw InvalidArgument("config: mesh.n must be >= 2");
  if (c.mesh.degree != 1 && c.mesh.degree != 2) throw InvalidArgument("config: mesh.degree must be 1 or 2");
  if (c.mesh.quadrature_refinement < 1) throw InvalidArgument("config: quadrature_refinement must be >= 1");
  (void)LevelFamily(c.sparse.base_step);
  c.kernel.validate();
  if (c.mc.samples < 2) throw InvalidArgument("config: mc.samples must be >= 2");
  if (!(c.mc.jitter >= 0.0)) throw InvalidArgument("config: mc.jitter must be >= 0");
  for (auto n : c.sweeps.elements) {
    if (n < 2) throw InvalidArgument("config: sweeps.n entries must be >= 2");
  }
  for (double s : c.sweeps.sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("config: sweeps.sigma entries must be >= 0");
  }
  if (c.reference.elements < 2) throw InvalidArgument("config: reference.n must be >= 2");
  if (c.validate.isserlis_samples < 2 || c.validate.remainder_samples < 1) {
    throw InvalidArgument("config: validate sample counts too small");
  }
  if (c.validate.full_tensor_elements < 2) throw InvalidArgument("config: validate.full_tensor_n must be >= 2");
  if (c.source != "one" && c.source != "sine") throw InvalidArgument("config: source must be 'one' or 'sine'");
  if (c.order > c.caps.max_pairing_order) {
    throw CapacityError("config: recursion.K = " + std::to_string(c.order) +
                        " needs moments beyond caps.max_pairing_order");
  }
  for (unsigned k : c.sweeps.orders) {
    if (k > c.caps.max_pairing_order) {
      throw CapacityError("config: sweeps.K entry " + std::to_string(k) +
                          " needs moments beyond caps.max_pairing_order");
    }
  }
}

std::string config_json(const StudyConfig& c) {
  json j;
  j["mesh"] = {{"d", c.mesh.dimension},
               {"n", c.mesh.elements},
               {"degree", c.mesh.degree},
               {"quadrature_refinement", c.mesh.quadrature_refinement}};
  j["sparse"] = {{"h0", c.sparse.base_step}, {"L", c.sparse.level}};
  j["kernel"] = {{"kind", to_string(c.kernel.kind)},
                 {"sigma", c.kernel.sigma},
                 {"correlation_length", c.kernel.correlation_length},
                 {"gamma", c.kernel.holder_exponent}};
  j["recursion"] = {{"K", c.order}};
  j["mc"] = {{"samples", c.mc.samples},
             {"seed", c.mc.seed},
             {"antithetic", c.mc.antithetic},
             {"jitter", c.mc.jitter}};
  j["sweeps"] = {{"n", c.sweeps.elements},
                 {"L", c.sweeps.levels},
                 {"sigma", c.sweeps.sigmas},
                 {"K", c.sweeps.orders}};
  j["reference"] = {{"n", c.reference.elements}, {"L", c.reference.level}, {"file", c.reference.file}};
  j["validate"] = {{"isserlis_samples", c.validate.isserlis_samples},
                   {"remainder_samples", c.validate.remainder_samples},
                   {"full_tensor_n", c.validate.full_tensor_elements},
                   {"full_tensor_L", c.validate.full_tensor_level}};
  j["caps"] = {{"max_solves", c.caps.max_solves}, {"max_pairing_order", c.caps.max_pairing_order}};
  j["source"] = c.source;
  j["threads"] = c.threads;
  j["write_table"] = c.write_table;
  return j.dump(2);
}

ScalarFunction source_function(const std::string& name) {
  if (name == "one") return [](double) { return 1.0; };
  if (name == "sine") {
    return [](double x) { return std::numbers::pi * std::numbers::pi * std::sin(std::numbers::pi * x); };
  }
  throw InvalidArgument("unknown source '" + name + "'");
}

RecursionConfig recursion_config(const StudyConfig& c, std::size_t elements, unsigned level,
                                 unsigned order) {
  RecursionConfig r;
  r.elements = elements;
  r.degree = c.mesh.degree;
  r.level = level;
  r.base_step = c.sparse.base_step;
  r.order = order;
  r.max_solves = c.caps.max_solves;
  r.threads = c.threads;
  r.quadrature_refinement = c.mesh.quadrature_refinement;
  r.source = source_function(c.source);
  return r;
}

McConfig mc_config(const StudyConfig& c) {
  McConfig m;
  m.samples = c.mc.samples;
  m.seed = c.mc.seed;
  m.antithetic = c.mc.antithetic;
  m.threads = c.threads;
  m.jitter = c.mc.jitter;
  return m;
}

}  // namespace momeq::studies
