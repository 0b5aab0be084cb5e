#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "laip/env.hpp"
#include "laip/simplex.hpp"

namespace laip::prompts {

// Loads versioned prompt templates ("*.txt") from a directory and renders
// them by substituting {{placeholder}} variables. Wording lives in the data
// files, not in code.
class TemplateStore {
 public:
  static TemplateStore load_dir(const std::filesystem::path& dir);

  bool has(const std::string& name) const { return templates_.count(name) != 0; }
  const std::string& raw(const std::string& name) const;  // throws TemplateError
  // Throws TemplateError when a placeholder has no value.
  std::string render(const std::string& name,
                     const std::map<std::string, std::string>& vars) const;
  void set(const std::string& name, std::string text);
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::string> templates_;
};

// "{{key}}" substitution on a raw template string.
std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& vars);

// Textual state context: current room, visible restaurants with status,
// reachable rooms.
std::string render_observation(const TemplateStore& store, const env::RoomGraph& g,
                               const env::Observation& obs);

// Full per-timestep context: what the agent has seen so far (its knowledge
// state) followed by the current observation. `visited` lists the rooms
// occupied so far, current room last. Two timesteps never render identically,
// which keeps request digests unique along a trajectory.
std::string render_state_context(const TemplateStore& store, const env::RoomGraph& g,
                                 const env::WorldState& w,
                                 const std::vector<env::RoomId>& visited);

// Candidate action block "A1: ...\nA2: ...".
std::string render_action_list(const env::RoomGraph& g,
                               const std::vector<env::Action>& actions);

// "H1 (prior 0.1667): <statement>" block.
std::string render_hypothesis_list(const std::vector<std::string>& statements,
                                   const ProbabilityDistribution& prior);

// "H1: A1=0.9405, A2=0.0095, ..." block.
std::string render_matrix(const std::vector<std::vector<double>>& rows);

// Environment rule text generated from an arbitrary graph, used as the
// system prompt for worlds that ship without a hand-written one.
std::string render_environment_rules(const env::RoomGraph& g);

}  // namespace laip::prompts
