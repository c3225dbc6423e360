// gsd: batch front end for the Gaussian splat deformation pipeline.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "gsd/arap.hpp"
#include "gsd/compositor.hpp"
#include "gsd/config.hpp"
#include "gsd/deform_graph.hpp"
#include "gsd/errors.hpp"
#include "gsd/image.hpp"
#include "gsd/json_io.hpp"
#include "gsd/render.hpp"
#include "gsd/server.hpp"
#include "gsd/session.hpp"
#include "gsd/skinning.hpp"
#include "gsd/splat_io.hpp"
#include "gsd/synthetic.hpp"

namespace {

void write_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deform 3D Gaussian splat objects with an as-rigid-as-possible control graph"};
  app.require_subcommand(1);

  // synth
  std::string synth_shape = "dumbbell", synth_out;
  std::size_t synth_n = 10000;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Write a synthetic splat object");
  synth->add_option("--shape", synth_shape, "random | blob | dumbbell")
      ->check(CLI::IsMember({"random", "blob", "dumbbell"}));
  synth->add_option("--n", synth_n, "Gaussian count");
  synth->add_option("--seed", synth_seed);
  synth->add_option("--out", synth_out)->required();

  // sample
  std::string sample_in, sample_out, sample_weighting = "uniform";
  std::size_t sample_n = gsd::defaults::kControlCount, sample_k = gsd::defaults::kGraphNeighbors;
  std::uint64_t sample_seed = 0;
  bool sample_activated = false;
  auto* sample = app.add_subcommand("sample", "Sample control nodes and build the deformation graph");
  sample->add_option("--input", sample_in, "3DGS PLY")->required();
  sample->add_option("--n", sample_n, "control node count");
  sample->add_option("--k", sample_k, "geodesic neighbors per node (even)");
  sample->add_option("--seed", sample_seed);
  sample->add_option("--weighting", sample_weighting, "uniform | inverse-geodesic")
      ->check(CLI::IsMember({"uniform", "inverse-geodesic"}));
  sample->add_flag("--activated", sample_activated, "PLY stores activated values");
  sample->add_option("--out", sample_out, "graph JSON")->required();

  // solve
  std::string solve_splat, solve_graph, solve_handles, solve_out, solve_result;
  int solve_iters = gsd::defaults::kSolverIterations;
  std::size_t solve_k_tilde = gsd::defaults::kSkinNeighbors;
  bool solve_activated = false;
  auto* solve = app.add_subcommand("solve", "Deform a splat with handle constraints");
  solve->add_option("--splat", solve_splat)->required();
  solve->add_option("--graph", solve_graph)->required();
  solve->add_option("--handles", solve_handles, "{indices, targets} JSON")->required();
  solve->add_option("--iters", solve_iters)->check(CLI::PositiveNumber);
  solve->add_option("--k-tilde", solve_k_tilde, "controls per Gaussian");
  solve->add_option("--result-out", solve_result, "write solved control positions/rotations JSON");
  solve->add_flag("--activated", solve_activated);
  solve->add_option("--out", solve_out, "deformed PLY")->required();

  // camera
  std::vector<double> cam_eye = {0.0, 0.0, -4.0}, cam_target = {0.0, 0.0, 0.0}, cam_up = {0.0, 1.0, 0.0};
  double cam_fov = 40.0;
  int cam_w = 512, cam_h = 512;
  std::string cam_out;
  auto* camera = app.add_subcommand("camera", "Write a look-at camera JSON");
  camera->add_option("--eye", cam_eye)->expected(3);
  camera->add_option("--target", cam_target)->expected(3);
  camera->add_option("--up", cam_up)->expected(3);
  camera->add_option("--fov", cam_fov, "vertical field of view, degrees");
  camera->add_option("--width", cam_w);
  camera->add_option("--height", cam_h);
  camera->add_option("--out", cam_out)->required();

  // render
  std::string render_splat, render_camera, render_out;
  bool render_activated = false;
  auto* render = app.add_subcommand("render", "Render a splat to an RGBA PNG");
  render->add_option("--splat", render_splat)->required();
  render->add_option("--camera", render_camera)->required();
  render->add_flag("--activated", render_activated);
  render->add_option("--out", render_out)->required();

  // composite
  std::string comp_fg, comp_bg, comp_out, comp_mask;
  double comp_threshold = gsd::defaults::kBoundaryThreshold;
  int comp_radius = gsd::defaults::kBoundaryRadius;
  auto* composite = app.add_subcommand("composite", "Alpha-blend a render over a background");
  composite->add_option("--fg", comp_fg, "RGBA render")->required();
  composite->add_option("--bg", comp_bg, "background")->required();
  composite->add_option("--out", comp_out)->required();
  composite->add_option("--mask-out", comp_mask, "dilated boundary mask PNG");
  composite->add_option("--threshold", comp_threshold);
  composite->add_option("--radius", comp_radius)->check(CLI::NonNegativeNumber);

  // serve
  std::string serve_host = "127.0.0.1";
  std::uint16_t serve_port = 8765;
  auto* serve = app.add_subcommand("serve", "Run the interactive edit service over WebSocket");
  serve->add_option("--host", serve_host);
  serve->add_option("--port", serve_port);

  // replay
  std::string replay_in, replay_out, replay_frames;
  auto* replay = app.add_subcommand("replay", "Feed a JSON-lines transcript through one session");
  replay->add_option("--transcript", replay_in)->required();
  replay->add_option("--out", replay_out, "JSON replies, one per line")->required();
  replay->add_option("--frames", replay_frames, "update frames, each prefixed by its u32 length");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      gsd::GaussianCloud cloud;
      if (synth_shape == "random") {
        cloud = gsd::synthetic::random_cloud(synth_n, synth_seed);
      } else if (synth_shape == "blob") {
        cloud = gsd::synthetic::blob(synth_n, Eigen::Vector3d::Zero(), 1.0, synth_seed);
      } else {
        cloud = gsd::synthetic::dumbbell(synth_n, synth_seed).cloud;
      }
      gsd::save_ply_file(synth_out, cloud);
      std::cout << "wrote " << cloud.size() << " Gaussians to " << synth_out << "\n";
    } else if (*sample) {
      const auto cloud = gsd::load_ply_file(sample_in, {sample_activated});
      gsd::GraphOptions opts;
      opts.control_count = sample_n;
      opts.neighbors = sample_k;
      opts.seed = sample_seed;
      opts.weighting = sample_weighting == "uniform" ? gsd::EdgeWeighting::Uniform
                                                     : gsd::EdgeWeighting::InverseGeodesic;
      const auto graph = gsd::build_control_graph(cloud, opts);
      gsd::write_json_file(sample_out, gsd::graph_to_json(graph));
      std::cout << "sampled " << graph.size() << " control nodes (k = " << graph.k << ", "
                << graph.k_half_edges.edges.size() << " initial edges, "
                << graph.k_half_edges.repair_count << " repair edges)\n";
    } else if (*solve) {
      const auto cloud = gsd::load_ply_file(solve_splat, {solve_activated});
      const auto graph = gsd::graph_from_json(gsd::read_json_file(solve_graph));
      for (std::size_t idx : graph.node_indices)
        if (idx >= cloud.size()) throw gsd::ArgumentError("graph does not belong to this splat");
      const auto handles = gsd::handles_from_json(gsd::read_json_file(solve_handles));
      const auto result = gsd::deform(graph, handles, solve_iters);
      if (result.status == gsd::SolveStatus::NoHandles)
        std::cerr << "warning: no handles given, rest pose returned\n";
      std::cout << "energy trace:";
      for (double e : result.energy_trace) std::printf(" %.9g", e);
      std::cout << "\n";
      const auto binding = gsd::bind(cloud, graph, solve_k_tilde);
      gsd::save_ply_file(solve_out, gsd::apply_lbs(cloud, binding, graph, result), {solve_activated});
      if (!solve_result.empty()) gsd::write_json_file(solve_result, gsd::result_to_json(result));
    } else if (*camera) {
      const auto cam = gsd::Camera::look_at({cam_eye[0], cam_eye[1], cam_eye[2]},
                                            {cam_target[0], cam_target[1], cam_target[2]},
                                            {cam_up[0], cam_up[1], cam_up[2]}, cam_fov, cam_w, cam_h);
      gsd::write_json_file(cam_out, gsd::camera_to_json(cam));
    } else if (*render) {
      const auto cloud = gsd::load_ply_file(render_splat, {render_activated});
      const auto cam = gsd::camera_from_json(gsd::read_json_file(render_camera));
      gsd::write_png(render_out, gsd::render(cloud, cam));
    } else if (*composite) {
      const auto fg = gsd::read_png_rgba(comp_fg);
      const auto bg = gsd::read_png_rgb(comp_bg);
      gsd::write_png(comp_out, gsd::alpha_composite(fg, bg));
      if (!comp_mask.empty()) {
        const auto mask = gsd::boundary_mask(gsd::alpha_channel(fg), fg.width, fg.height,
                                             comp_threshold, comp_radius);
        gsd::write_png(comp_mask, mask);
      }
    } else if (*serve) {
      gsd::service::Server server(serve_host, serve_port);
      std::cout << "listening on ws://" << serve_host << ":" << server.port() << std::endl;
      server.run();
    } else if (*replay) {
      std::ifstream in(replay_in);
      if (!in) throw gsd::Error("cannot open '" + replay_in + "'");
      std::ofstream out(replay_out);
      std::ofstream frames;
      if (!replay_frames.empty()) frames.open(replay_frames, std::ios::binary);
      gsd::service::Session session;
      std::string line;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        for (const auto& reply : session.handle_text(line)) {
          if (const auto* j = std::get_if<nlohmann::json>(&reply)) {
            out << j->dump() << "\n";
          } else if (frames.is_open()) {
            const auto& bytes = std::get<std::vector<std::uint8_t>>(reply);
            write_u32(frames, static_cast<std::uint32_t>(bytes.size()));
            frames.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
          }
        }
      }
    }
  } catch (const gsd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
