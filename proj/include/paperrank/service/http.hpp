#pragma once

// REST/JSON routes over cpp-httplib. Error bodies are {"error": "..."}.

#include <httplib.h>
#include <json.hpp>

#include <charconv>
#include <optional>
#include <string>

#include "paperrank/service/engine.hpp"

namespace paperrank::service {

namespace http_detail {

using nlohmann::json;

inline void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline json paper_json(const PaperRecord& p) { return to_json(p); }

inline json user_json(const store::UserRecord& u) {
  return {{"id", u.id}, {"username", u.username}, {"categories", u.categories}};
}

inline json report_json(const NightlyReport& r) {
  json failures = json::array();
  for (const auto& f : r.failures)
    failures.push_back({{"paper_id", f.paper_id}, {"category", f.category}, {"reason", f.reason}});
  return {{"new", r.new_papers}, {"updated", r.updated}, {"inferred", r.inferred}, {"failures", failures}};
}

inline json body_json(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception&) {
    throw ValidationError("request body is not valid JSON");
  }
}

inline std::string string_field(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body[key].is_string())
    throw ValidationError(std::string("missing string field '") + key + "'");
  return body[key].get<std::string>();
}

inline std::size_t size_param(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const auto v = req.get_param_value(key);
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ValidationError(std::string("parameter ") + key + " must be a non-negative integer");
  return out;
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    if (end > start) out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

inline std::optional<std::string> bearer_token(const httplib::Request& req) {
  if (!req.has_header("Authorization")) return std::nullopt;
  const auto h = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (!std::string_view(h).starts_with(prefix)) throw AuthError("expected a Bearer token");
  return h.substr(prefix.size());
}

/// Runs `fn`, translating library errors into status codes.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const AuthError& e) {
    res.set_header("WWW-Authenticate", "Bearer");
    send(res, 401, {{"error", e.what()}});
  } catch (const NotFoundError& e) {
    send(res, 404, {{"error", e.what()}});
  } catch (const ConflictError& e) {
    send(res, 409, {{"error", e.what()}});
  } catch (const ValidationError& e) {
    send(res, 400, {{"error", e.what()}});
  } catch (const ParseError& e) {
    send(res, 400, {{"error", e.what()}});
  } catch (const ConfigError& e) {
    send(res, 400, {{"error", e.what()}});
  } catch (const std::exception& e) {
    send(res, 500, {{"error", e.what()}});
  }
}

}  // namespace http_detail

/// Registers every route on `server`. The engine must outlive the server.
inline void install_routes(httplib::Server& server, Engine& engine) {
  using namespace http_detail;

  auto optional_user = [&engine](const httplib::Request& req) -> std::optional<std::string> {
    auto token = bearer_token(req);
    if (!token) return std::nullopt;
    return engine.authenticate(*token);
  };
  auto required_user = [optional_user](const httplib::Request& req) {
    auto user = optional_user(req);
    if (!user) throw AuthError("authentication required");
    return *user;
  };

  server.Get("/v1/health", [&engine](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json models = json::object();
      for (const auto& c : engine.available_categories()) models[c] = *engine.model_version(c);
      send(res, 200, {{"status", "ok"}, {"models", models}});
    });
  });

  server.Get("/v1/categories", [&engine](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send(res, 200, engine.available_categories()); });
  });

  server.Post("/v1/users", [&engine](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto body = body_json(req);
      auto user = engine.register_user(string_field(body, "username"), string_field(body, "password"));
      send(res, 201, user_json(user));
    });
  });

  server.Post("/v1/sessions", [&engine](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto body = body_json(req);
      auto s = engine.login(string_field(body, "username"), string_field(body, "password"));
      send(res, 201, {{"token", s.token}, {"user_id", s.user_id}, {"expires_at", to_unix(s.expires)}});
    });
  });

  server.Delete("/v1/sessions", [&engine, required_user](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      required_user(req);
      engine.logout(*bearer_token(req));
      send(res, 200, json::object());
    });
  });

  server.Get("/v1/users/me/categories", [&engine, required_user](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send(res, 200, engine.categories(required_user(req))); });
  });

  server.Put("/v1/users/me/categories", [&engine, required_user](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto user = required_user(req);
      auto body = body_json(req);
      if (body.is_object() && body.contains("categories")) body = body["categories"];
      if (!body.is_array()) throw ValidationError("expected an array of category codes");
      std::set<std::string> cats;
      for (const auto& c : body) {
        if (!c.is_string()) throw ValidationError("category codes must be strings");
        cats.insert(c.get<std::string>());
      }
      engine.set_categories(user, cats);
      send(res, 200, engine.categories(user));
    });
  });

  server.Get("/v1/papers", [&engine, optional_user](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto user = optional_user(req);
      ListQuery q;
      if (req.has_param("categories")) q.categories = split_commas(req.get_param_value("categories"));
      const auto sort = req.has_param("sort") ? req.get_param_value("sort") : std::string("date");
      if (sort == "personal") {
        q.sort = SortMode::personal;
      } else if (sort != "date") {
        throw ValidationError("sort must be personal or date");
      }
      if (q.sort == SortMode::personal && !user) throw AuthError("personal sort requires a session");
      std::optional<Days> from, to;
      if (req.has_param("from")) from = parse_date(req.get_param_value("from"));
      if (req.has_param("to")) to = parse_date(req.get_param_value("to"));
      if (!to) to = from ? from : engine.latest_day();
      if (!to) {
        send(res, 200, json::array());
        return;
      }
      q.to = *to;
      q.from = from.value_or(*to);
      if (req.has_param("limit")) q.limit = size_param(req, "limit", 0);
      q.offset = size_param(req, "offset", 0);

      json out = json::array();
      for (const auto& lp : engine.list_papers(q, user)) {
        auto j = paper_json(lp.paper);
        if (lp.score) j["score"] = *lp.score;
        out.push_back(std::move(j));
      }
      send(res, 200, out);
    });
  });

  server.Get("/v1/papers/:id", [&engine](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto& id = req.path_params.at("id");
      auto p = engine.repository().paper(id);
      if (!p) throw NotFoundError("unknown paper " + id);
      send(res, 200, paper_json(*p));
    });
  });

  server.Get("/v1/papers/:id/related", [&engine](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::optional<std::string> category;
      if (req.has_param("category")) category = req.get_param_value("category");
      json out = json::array();
      for (const auto& r : engine.related(req.path_params.at("id"), size_param(req, "n", 5), category)) {
        auto j = paper_json(r.paper);
        j["inner_product"] = r.inner_product;
        out.push_back(std::move(j));
      }
      send(res, 200, out);
    });
  });

  server.Post("/v1/events", [&engine, required_user](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto user = required_user(req);
      auto body = body_json(req);
      auto r = engine.record_event(user, string_field(body, "paper_id"), string_field(body, "kind"));
      if (r.duplicate)
        send(res, 200, {{"id", r.id}, {"status", "duplicate-ignored"}});
      else
        send(res, 201, {{"id", r.id}, {"status", "recorded"}});
    });
  });
}

}  // namespace paperrank::service
