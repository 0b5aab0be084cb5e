#include "laip/prompts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "laip/errors.hpp"

namespace laip::prompts {

namespace {

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

TemplateStore TemplateStore::load_dir(const std::filesystem::path& dir) {
  TemplateStore store;
  if (!std::filesystem::is_directory(dir))
    throw IoError("prompt template directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    // Trailing newline is an editor artifact, not prompt content.
    while (!text.empty() && text.back() == '\n') text.pop_back();
    store.templates_[entry.path().stem().string()] = std::move(text);
  }
  if (store.templates_.empty())
    throw IoError("no *.txt templates in " + dir.string());
  return store;
}

const std::string& TemplateStore::raw(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw TemplateError("unknown template '" + name + "'");
  return it->second;
}

std::string TemplateStore::render(const std::string& name,
                                  const std::map<std::string, std::string>& vars) const {
  return render_template(raw(name), vars);
}

void TemplateStore::set(const std::string& name, std::string text) {
  templates_[name] = std::move(text);
}

std::vector<std::string> TemplateStore::names() const {
  std::vector<std::string> out;
  for (const auto& [name, text] : templates_) out.push_back(name);
  return out;
}

std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    auto open = text.find("{{", i);
    if (open == std::string::npos) {
      out.append(text, i, std::string::npos);
      break;
    }
    auto close = text.find("}}", open + 2);
    if (close == std::string::npos)
      throw TemplateError("unterminated placeholder in template");
    out.append(text, i, open - i);
    std::string key = text.substr(open + 2, close - open - 2);
    auto it = vars.find(key);
    if (it == vars.end())
      throw TemplateError("no value for placeholder '" + key + "'");
    out += it->second;
    i = close + 2;
  }
  return out;
}

std::string render_observation(const TemplateStore& store, const env::RoomGraph& g,
                               const env::Observation& obs) {
  std::string visibility;
  if (obs.visible.empty()) {
    visibility = "No restaurants are visible from this room.";
  } else {
    for (std::size_t i = 0; i < obs.visible.size(); ++i) {
      const auto& [restaurant, open] = obs.visible[i];
      if (i) visibility += "\n";
      visibility += "The " + g.restaurant(restaurant).name +
                    " restaurant is visible from here: it is " +
                    (open ? "open" : "closed") + ".";
    }
  }
  std::string reachable;
  for (std::size_t i = 0; i < obs.reachable.size(); ++i) {
    if (i) reachable += obs.reachable.size() == 2 ? " and " : ", ";
    if (i + 1 == obs.reachable.size() && obs.reachable.size() > 2) reachable += "and ";
    reachable += "Room " + std::to_string(obs.reachable[i]);
  }
  if (reachable.empty()) reachable = "no other room";
  return store.render("observation", {{"room", std::to_string(obs.room)},
                                      {"visibility", visibility},
                                      {"reachable", reachable}});
}

std::string render_state_context(const TemplateStore& store, const env::RoomGraph& g,
                                 const env::WorldState& w,
                                 const std::vector<env::RoomId>& visited) {
  if (visited.empty()) throw DegenerateInput("no visited rooms");
  std::string rooms;
  for (std::size_t i = 0; i < visited.size(); ++i) {
    if (i) rooms += ", ";
    rooms += "Room " + std::to_string(visited[i]);
  }
  std::string seen;
  for (env::RestaurantId r = 0; r < g.restaurant_count(); ++r) {
    bool observed = false;
    for (env::RoomId room : visited)
      if (g.restaurant_visible(r, room)) observed = true;
    if (!seen.empty()) seen += "\n";
    if (observed) {
      seen += "The agent has seen that the " + g.restaurant(r).name + " restaurant is " +
              (w.is_open(r) ? "open" : "closed") + ".";
    } else {
      seen += "The agent has not yet seen whether the " + g.restaurant(r).name +
              " restaurant is open.";
    }
  }
  if (seen.empty()) seen = "There are no restaurants in this environment.";
  std::string history = store.render("history", {{"rooms", rooms}, {"seen", seen}});
  return history + "\n" +
         render_observation(store, g, env::observe(g, w, visited.back()));
}

std::string render_action_list(const env::RoomGraph& g,
                               const std::vector<env::Action>& actions) {
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += "\n";
    out += "A" + std::to_string(i + 1) + ": " + env::to_string(actions[i], g);
  }
  return out;
}

std::string render_hypothesis_list(const std::vector<std::string>& statements,
                                   const ProbabilityDistribution& prior) {
  if (statements.size() != prior.size())
    throw DimensionMismatch("hypothesis count does not match prior size");
  std::string out;
  for (std::size_t i = 0; i < statements.size(); ++i) {
    if (i) out += "\n";
    out += "H" + std::to_string(i + 1) + " (prior " + fmt4(prior[i]) + "): " + statements[i];
  }
  return out;
}

std::string render_matrix(const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += "\n";
    out += "H" + std::to_string(i + 1) + ":";
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out += " A" + std::to_string(j + 1) + "=" + fmt4(rows[i][j]);
  }
  return out;
}

std::string render_environment_rules(const env::RoomGraph& g) {
  std::ostringstream os;
  os << "There are " << g.rooms().size() << " rooms:\n";
  for (env::RoomId room : g.rooms()) {
    os << "- Room " << room;
    const auto& nbrs = g.neighbors(room);
    if (!nbrs.empty()) {
      os << " connects to ";
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        if (i) os << (i + 1 == nbrs.size() ? " and " : ", ");
        os << "Room " << nbrs[i];
      }
    }
    if (auto r = g.restaurant_at(room))
      os << "; it has a " << g.restaurant(*r).name << " restaurant in it";
    os << ".\n";
  }
  os << "\nRestaurants are visible from different rooms:\n";
  for (env::RestaurantId i = 0; i < g.restaurant_count(); ++i) {
    os << "- The " << g.restaurant(i).name << " restaurant is visible from ";
    const auto& rooms = g.visible_from(i);
    for (std::size_t k = 0; k < rooms.size(); ++k) {
      if (k) os << (k + 1 == rooms.size() ? " and " : ", ");
      os << "Room " << rooms[k];
    }
    os << ".\n";
  }
  os << "\nThe agent knows for sure if a restaurant is open if it gets close "
        "enough to see it. Each restaurant is almost always open, but sometimes "
        "is closed. If a restaurant is closed, it will not open up later. Agents "
        "cannot eat at restaurants that are closed, even if they like a food.";
  return os.str();
}

}  // namespace laip::prompts
