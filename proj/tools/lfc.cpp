#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "lfc/metrics.hpp"
#include "lfc/model_io.hpp"
#include "lfc/pipeline.hpp"
#include "lfc/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json json_db(double v) {
  if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
  return json(v);
}

// Output path for one qp of a multi-qp run: base.ext -> base_qpNN.ext.
std::string qp_path(const std::string& base, int qp, bool multi) {
  if (!multi) return base;
  fs::path p(base);
  fs::path stem = p.stem();
  fs::path ext = p.extension();
  return (p.parent_path() / (stem.string() + "_qp" + std::to_string(qp) + ext.string())).string();
}

lfc::ModelSet load_models(const std::vector<std::string>& paths) {
  lfc::ModelSet ms;
  for (const std::string& p : paths) ms.add(lfc::load_model(p));
  return ms;
}

// Layered configuration: file values fill in only the options the command
// line left untouched, so explicit flags always win.
void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw lfc::FormatError("cannot read config file " + path);
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::string where = path + ":" + std::to_string(lineno);
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw lfc::FormatError("expected key=value at " + where);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front())
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw lfc::FormatError("empty key at " + where);
    if (key == "config") throw lfc::FormatError("config files cannot nest at " + where);
    CLI::Option* op = sub->get_option_no_throw("--" + key);
    if (op == nullptr) throw lfc::FormatError("unknown config key '" + key + "' at " + where);
    if (op->count() > 0) continue;
    for (char& c : value)
      if (c == ',') c = ' ';
    std::istringstream ss(value);
    std::string token;
    bool any = false;
    while (ss >> token) {
      op->add_result(token);
      any = true;
    }
    if (!any) throw lfc::FormatError("empty value for '" + key + "' at " + where);
    op->run_callback();
  }
}

void require_set(const std::string& value, const char* flag) {
  if (value.empty()) throw lfc::DomainError(std::string(flag) + " is required");
}

void write_decision_log(const std::string& path, const std::vector<lfc::ViewDecision>& decisions) {
  std::ofstream f(path);
  if (!f) throw lfc::FormatError("cannot write " + path);
  f << lfc::decision_csv_header() << "\n";
  for (const lfc::ViewDecision& d : decisions) f << lfc::decision_csv_row(d) << "\n";
}

void write_rate_report(const std::string& path, const lfc::Bitstream& bs, std::size_t dropped) {
  lfc::RateReport rr = lfc::measure_rate(bs);
  json j;
  j["total_bits"] = rr.total_bits;
  j["bpp"] = rr.bpp;
  j["dropped_views"] = dropped;
  json levels = json::array();
  for (const auto& [lvl, bits] : rr.bits_per_level) {
    json e;
    e["level"] = lvl;
    e["bits"] = bits;
    e["share"] = rr.level_share(lvl);
    levels.push_back(e);
  }
  j["levels"] = levels;
  std::ofstream f(path);
  if (!f) throw lfc::FormatError("cannot write " + path);
  f << j.dump(2) << "\n";
}

void append_curve_point(const std::string& path, double rate, double quality) {
  bool fresh = !fs::exists(path);
  std::ofstream f(path, std::ios::app);
  if (!f) throw lfc::FormatError("cannot write " + path);
  if (fresh) f << "rate_bpp,quality\n";
  std::ostringstream os;
  os.precision(12);
  os << rate << "," << lfc::format_quality(quality);
  f << os.str() << "\n";
}

int run_synth_data(const std::string& out, int count, int width, int height, int grid_s,
                   int grid_t, std::uint64_t seed, double noise,
                   const std::vector<double>& disparities) {
  lfc::SyntheticConfig cfg;
  cfg.width = width;
  cfg.height = height;
  cfg.grid_s = grid_s;
  cfg.grid_t = grid_t;
  cfg.noise_sigma = noise;
  cfg.layers.clear();
  for (std::size_t i = 0; i < disparities.size(); ++i)
    cfg.layers.push_back({seed * 100 + i, disparities[i]});
  std::vector<std::string> dirs = lfc::write_corpus(out, count, cfg, seed);
  for (const std::string& d : dirs) std::cout << d << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"light-field compression toolkit"};
  app.require_subcommand(1);

  // --- synth-data ---------------------------------------------------------
  auto* sd = app.add_subcommand("synth-data", "generate a synthetic light-field corpus");
  std::string sd_out;
  int sd_count = 1, sd_width = 64, sd_height = 64, sd_gs = 8, sd_gt = 8;
  std::uint64_t sd_seed = 1;
  double sd_noise = 0.0;
  std::vector<double> sd_disp{0.0};
  sd->add_option("--out", sd_out, "output corpus directory (required)");
  sd->add_option("--count", sd_count, "number of light fields");
  sd->add_option("--width", sd_width, "view width");
  sd->add_option("--height", sd_height, "view height");
  sd->add_option("--grid-s", sd_gs, "grid rows");
  sd->add_option("--grid-t", sd_gt, "grid columns");
  sd->add_option("--seed", sd_seed, "corpus seed");
  sd->add_option("--noise", sd_noise, "texture noise sigma");
  sd->add_option("--disparity", sd_disp, "layer disparities (repeat for multiple layers)");
  std::string sd_config;
  sd->add_option("--config", sd_config, "key=value config file, flags override it");

  // --- train --------------------------------------------------------------
  auto* tr = app.add_subcommand("train", "train view-synthesis models");
  std::string tr_data, tr_out, tr_regime = "perqp";
  std::vector<int> tr_qps{18, 24, 28, 32};
  lfc::TrainConfig tcfg;
  tr->add_option("--data", tr_data, "corpus directory (required)");
  tr->add_option("--out", tr_out, "model output directory (required)");
  tr->add_option("--regime", tr_regime, "original | mixed | perqp");
  tr->add_option("--qp", tr_qps, "qp list for perqp/mixed regimes");
  tr->add_option("--seed", tcfg.seed, "training seed");
  tr->add_option("--steps", tcfg.steps, "training steps");
  tr->add_option("--batch", tcfg.batch, "batch size");
  tr->add_option("--lr", tcfg.adam.lr, "learning rate");
  tr->add_option("--alpha", tcfg.alpha, "first discriminator weight");
  tr->add_option("--beta", tcfg.beta, "second discriminator weight");
  tr->add_option("--recon-weight", tcfg.recon_weight, "reconstruction term weight");
  tr->add_option("--patch-in", tcfg.patch_in, "input patch size");
  tr->add_option("--patch-out", tcfg.patch_out, "target patch size");
  tr->add_option("--stride", tcfg.stride, "patch origin stride");
  tr->add_option("--gop", tcfg.gop_size, "gop size");
  tr->add_option("--n-sweep", tcfg.n_sweep, "disparity sweep levels");
  tr->add_option("--d-max", tcfg.d_max, "disparity sweep range");
  tr->add_option("--n-refs", tcfg.n_refs, "references per target");
  tr->add_option("--disp-channels", tcfg.disp_channels, "disparity net channels");
  tr->add_option("--disp-kernels", tcfg.disp_kernels, "disparity net kernels");
  tr->add_option("--color-channels", tcfg.color_channels, "color net channels");
  tr->add_option("--color-kernels", tcfg.color_kernels, "color net kernels");
  tr->add_option("--disc-channels", tcfg.disc_channels, "discriminator channels");
  tr->add_option("--disc-kernel", tcfg.disc_kernel, "discriminator kernel");
  std::string tr_config;
  tr->add_option("--config", tr_config, "key=value config file, flags override it");

  // --- encode -------------------------------------------------------------
  auto* en = app.add_subcommand("encode", "encode a light field to an LFBS stream");
  std::string en_in, en_out, en_mode = "all-coded", en_log, en_report;
  std::vector<int> en_qps{28};
  std::vector<std::string> en_models;
  double en_lambda = 0.1;
  int en_gop = 16;
  bool en_lossless = false;
  en->add_option("--input", en_in, "light field directory (required)");
  en->add_option("--output", en_out, "output stream path (required)");
  en->add_option("--qp", en_qps, "qp values (one stream per qp)");
  en->add_option("--mode", en_mode, "all-coded | rdo | all-dropped");
  en->add_option("--model", en_models, "model file(s) for rdo mode");
  en->add_option("--lambda", en_lambda, "lagrangian multiplier");
  en->add_option("--gop", en_gop, "gop size");
  en->add_flag("--lossless", en_lossless, "bypass transform and quantization");
  en->add_option("--log", en_log, "decision log csv path");
  en->add_option("--report", en_report, "rate report json path");
  std::string en_config;
  en->add_option("--config", en_config, "key=value config file, flags override it");

  // --- decode -------------------------------------------------------------
  auto* de = app.add_subcommand("decode", "decode an LFBS stream to a light field");
  std::string de_in, de_out;
  std::vector<std::string> de_models;
  de->add_option("--input", de_in, "stream path (required)");
  de->add_option("--output", de_out, "output light field directory (required)");
  de->add_option("--model", de_models, "model file(s) for dropped views");
  std::string de_config;
  de->add_option("--config", de_config, "key=value config file, flags override it");

  // --- eval ---------------------------------------------------------------
  auto* ev = app.add_subcommand("eval", "compare a decoded light field against the original");
  std::string ev_orig, ev_dec, ev_stream, ev_json, ev_csv, ev_curve;
  std::string ev_quality = "psnr";
  ev->add_option("--original", ev_orig, "original light field directory (required)");
  ev->add_option("--decoded", ev_dec, "decoded light field directory (required)");
  ev->add_option("--stream", ev_stream, "stream path for the rate (required)");
  ev->add_option("--json", ev_json, "report json path");
  ev->add_option("--csv", ev_csv, "per-view csv path");
  ev->add_option("--append-curve", ev_curve, "append the rd point to this curve csv");
  ev->add_option("--quality", ev_quality, "curve quality metric: psnr | ssim");
  std::string ev_config;
  ev->add_option("--config", ev_config, "key=value config file, flags override it");

  // --- bd -----------------------------------------------------------------
  auto* bd = app.add_subcommand("bd", "Bjontegaard delta between two rd curves");
  std::string bd_anchor, bd_test, bd_json, bd_svg;
  bd->add_option("--anchor", bd_anchor, "anchor curve csv (required)");
  bd->add_option("--test", bd_test, "test curve csv (required)");
  bd->add_option("--json", bd_json, "bd report json path");
  bd->add_option("--svg", bd_svg, "rd curve plot path");
  std::string bd_config;
  bd->add_option("--config", bd_config, "key=value config file, flags override it");

  CLI11_PARSE(app, argc, argv);

  try {
    struct ConfigBinding {
      CLI::App* sub;
      const std::string* path;
    };
    for (const ConfigBinding& b : {ConfigBinding{sd, &sd_config}, {tr, &tr_config},
                                   {en, &en_config}, {de, &de_config}, {ev, &ev_config},
                                   {bd, &bd_config}})
      if (b.sub->parsed() && !b.path->empty()) apply_config(b.sub, *b.path);

    if (sd->parsed()) require_set(sd_out, "--out");
    if (tr->parsed()) {
      require_set(tr_data, "--data");
      require_set(tr_out, "--out");
    }
    if (en->parsed()) {
      require_set(en_in, "--input");
      require_set(en_out, "--output");
    }
    if (de->parsed()) {
      require_set(de_in, "--input");
      require_set(de_out, "--output");
    }
    if (ev->parsed()) {
      require_set(ev_orig, "--original");
      require_set(ev_dec, "--decoded");
      require_set(ev_stream, "--stream");
    }
    if (bd->parsed()) {
      require_set(bd_anchor, "--anchor");
      require_set(bd_test, "--test");
    }

    if (sd->parsed())
      return run_synth_data(sd_out, sd_count, sd_width, sd_height, sd_gs, sd_gt, sd_seed,
                            sd_noise, sd_disp);

    if (tr->parsed()) {
      std::vector<lfc::LightField> lfs = lfc::load_corpus(tr_data);
      tcfg.qp_set = tr_qps;
      fs::create_directories(tr_out);
      auto train_one = [&](lfc::TrainRegime regime, int qp, const std::string& name) {
        lfc::TrainLog log;
        lfc::Generator<float> g = lfc::train(lfs, regime, qp, tcfg, &log);
        std::string model_path = tr_out + "/" + name + ".d2gm";
        lfc::save_model(g, model_path);
        std::ofstream f(tr_out + "/loss_" + name + ".csv");
        f << "step,g_value\n";
        for (std::size_t i = 0; i < log.g_values.size(); ++i)
          f << i << "," << log.g_values[i] << "\n";
        std::cout << model_path << "\n";
      };
      if (tr_regime == "original") {
        train_one(lfc::TrainRegime::Original, 0, "model_original");
      } else if (tr_regime == "mixed") {
        train_one(lfc::TrainRegime::MixedReconstructed, 0, "model_mixed");
      } else if (tr_regime == "perqp") {
        for (int qp : tr_qps)
          train_one(lfc::TrainRegime::PerQp, qp, "model_qp" + std::to_string(qp));
      } else {
        throw lfc::DomainError("unknown regime: " + tr_regime);
      }
      return 0;
    }

    if (en->parsed()) {
      lfc::LightField lf = lfc::load_lightfield_dir(en_in);
      lfc::PseudoSequence seq = lfc::spiral_scan(lf.grid_s, lf.grid_t);
      std::vector<lfc::View> frames = lfc::frames_from_lightfield(lf, seq);
      lfc::ModelSet models;
      if (en_mode == "rdo") models = load_models(en_models);
      const bool multi = en_qps.size() > 1;
      for (int qp : en_qps) {
        lfc::BitstreamHeader header;
        header.width = static_cast<std::uint16_t>(lf.view(0, 0).width());
        header.height = static_cast<std::uint16_t>(lf.view(0, 0).height());
        header.grid_s = static_cast<std::uint8_t>(lf.grid_s);
        header.grid_t = static_cast<std::uint8_t>(lf.grid_t);
        header.gop_size = static_cast<std::uint8_t>(en_gop);
        header.base_qp = static_cast<std::uint8_t>(qp);
        lfc::CodecConfig cc;
        cc.qp = qp;
        cc.lossless_bypass = en_lossless;

        lfc::Bitstream stream;
        std::vector<lfc::ViewDecision> decisions;
        std::size_t dropped = 0;
        if (en_mode == "all-coded") {
          stream = lfc::encode_sequence(frames, header, cc, {}).stream;
          lfc::GopLayout layout(en_gop, seq.size());
          for (int poc : lfc::all_droppable_pocs(layout)) {
            lfc::ViewDecision d;
            d.poc = poc;
            d.level = layout.level(poc);
            d.branch = lfc::Branch::Coded;
            decisions.push_back(d);
          }
        } else if (en_mode == "all-dropped") {
          lfc::GopLayout layout(en_gop, seq.size());
          std::set<int> drops = lfc::all_droppable_pocs(layout);
          stream = lfc::encode_sequence(frames, header, cc, drops).stream;
          dropped = drops.size();
          for (int poc : drops) {
            lfc::ViewDecision d;
            d.poc = poc;
            d.level = layout.level(poc);
            d.branch = lfc::Branch::Dropped;
            decisions.push_back(d);
          }
        } else if (en_mode == "rdo") {
          const lfc::Generator<float>& model = models.for_qp(qp);
          lfc::RdoEncodeResult res = lfc::encode_rdo(frames, header, cc, model, en_lambda);
          stream = std::move(res.stream);
          decisions = std::move(res.decisions);
          dropped = res.dropped.size();
        } else {
          throw lfc::DomainError("unknown mode: " + en_mode);
        }

        std::string out_path = qp_path(en_out, qp, multi);
        lfc::save_bitstream(stream, out_path);
        if (!en_log.empty()) write_decision_log(qp_path(en_log, qp, multi), decisions);
        if (!en_report.empty()) write_rate_report(qp_path(en_report, qp, multi), stream, dropped);
        std::cout << out_path << " qp=" << qp << " dropped=" << dropped << "\n";
      }
      return 0;
    }

    if (de->parsed()) {
      lfc::Bitstream bs = lfc::load_bitstream(de_in);
      lfc::ModelSet models = load_models(de_models);
      lfc::DecodedLightField dec =
          lfc::decode_light_field(bs, models.empty() ? nullptr : &models);
      lfc::save_lightfield(dec.lf, de_out);
      std::cout << de_out << " views=" << dec.lf.views.size() << " synthesized="
                << dec.dropped.size() << "\n";
      return 0;
    }

    if (ev->parsed()) {
      lfc::LightField orig = lfc::load_lightfield_dir(ev_orig);
      lfc::LightField dec = lfc::load_lightfield_dir(ev_dec);
      lfc::Bitstream bs = lfc::load_bitstream(ev_stream);
      lfc::EvalReport rep = lfc::evaluate_lightfield(orig, dec);
      lfc::RateReport rr = lfc::measure_rate(bs);

      json j;
      j["mean_psnr"] = json_db(rep.mean_psnr);
      j["mean_ssim"] = rep.mean_ssim;
      j["bpp"] = rr.bpp;
      j["views"] = json::array();
      for (const lfc::ViewQuality& q : rep.views) {
        json e;
        e["s"] = q.s;
        e["t"] = q.t;
        e["psnr_y"] = json_db(q.psnr_y);
        e["psnr_cb"] = json_db(q.psnr_cb);
        e["psnr_cr"] = json_db(q.psnr_cr);
        e["ssim"] = q.ssim_y;
        j["views"].push_back(e);
      }
      if (!ev_json.empty()) {
        std::ofstream f(ev_json);
        if (!f) throw lfc::FormatError("cannot write " + ev_json);
        f << j.dump(2) << "\n";
      }
      if (!ev_csv.empty()) {
        std::ofstream f(ev_csv);
        if (!f) throw lfc::FormatError("cannot write " + ev_csv);
        f << "s,t,psnr_y,psnr_cb,psnr_cr,ssim\n";
        for (const lfc::ViewQuality& q : rep.views)
          f << q.s << "," << q.t << "," << lfc::format_quality(q.psnr_y) << ","
            << lfc::format_quality(q.psnr_cb) << "," << lfc::format_quality(q.psnr_cr) << ","
            << q.ssim_y << "\n";
      }
      if (!ev_curve.empty()) {
        double quality = ev_quality == "ssim" ? rep.mean_ssim : rep.mean_psnr;
        append_curve_point(ev_curve, rr.bpp, quality);
      }
      std::cout << "psnr=" << lfc::format_quality(rep.mean_psnr) << " ssim=" << rep.mean_ssim
                << " bpp=" << rr.bpp << "\n";
      return 0;
    }

    if (bd->parsed()) {
      lfc::RdCurve anchor = lfc::load_rd_csv(bd_anchor);
      lfc::RdCurve test = lfc::load_rd_csv(bd_test);
      anchor.label = fs::path(bd_anchor).stem().string();
      test.label = fs::path(bd_test).stem().string();
      double rate = lfc::bd_rate(anchor, test);
      double quality = lfc::bd_quality(anchor, test);
      json j;
      j["anchor"] = anchor.label;
      j["test"] = test.label;
      j["bd_rate_pct"] = rate;
      j["bd_quality"] = quality;
      if (!bd_json.empty()) {
        std::ofstream f(bd_json);
        if (!f) throw lfc::FormatError("cannot write " + bd_json);
        f << j.dump(2) << "\n";
      }
      if (!bd_svg.empty()) lfc::write_rd_svg({anchor, test}, bd_svg);
      std::cout << "bd_rate=" << rate << "% bd_quality=" << quality << "\n";
      return 0;
    }
  } catch (const lfc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
