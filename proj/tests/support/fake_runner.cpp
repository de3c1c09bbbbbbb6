// Stand-in model for subprocess-runner tests. Predicts "building" wherever the
// first channel is >= 128 and can be told to misbehave.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "xaieval/raster_io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fake segmentation runner"};
    std::string manifest_path, out_dir, skip_id, fail_if, count_file;
    int exit_code = 0;
    double sleep_s = 0.0;
    bool wrong_size = false;
    app.add_option("--manifest", manifest_path)->required();
    app.add_option("--out", out_dir)->required();
    app.add_option("--skip", skip_id, "Write no mask for this id");
    app.add_option("--exit", exit_code, "Exit status after writing masks");
    app.add_option("--fail-if", fail_if, "Exit 3 when the output directory or any image path contains this text");
    app.add_option("--sleep", sleep_s, "Seconds to sleep before working");
    app.add_option("--count-file", count_file, "Append one line per invocation");
    app.add_flag("--wrong-size", wrong_size, "Write 1x1 masks");
    CLI11_PARSE(app, argc, argv);

    if (!count_file.empty()) {
        std::ofstream(count_file, std::ios::app) << manifest_path << "\n";
    }
    if (sleep_s > 0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(sleep_s));
    }

    if (!fail_if.empty() && out_dir.find(fail_if) != std::string::npos) {
        std::cerr << "fake runner: refusing " << out_dir << "\n";
        return 3;
    }

    std::ifstream in(manifest_path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto doc = nlohmann::json::parse(ss.str());
    std::cout << "fake runner: " << doc.at("entries").size() << " entries\n";
    for (const auto& e : doc.at("entries")) {
        const std::string id = e.at("id").get<std::string>();
        const std::string image = e.at("image").get<std::string>();
        if (!fail_if.empty() && image.find(fail_if) != std::string::npos) {
            std::cerr << "fake runner: refusing " << image << "\n";
            return 3;
        }
        if (id == skip_id) {
            continue;
        }
        const auto img = xaieval::load_image(image);
        std::vector<std::uint8_t> bits(wrong_size ? 1 : img.pixel_count());
        for (std::size_t i = 0; i < bits.size(); ++i) {
            bits[i] = img.samples()[i * img.channels()] >= 128 ? 1 : 0;
        }
        const std::size_t w = wrong_size ? 1 : img.width(), h = wrong_size ? 1 : img.height();
        xaieval::store_mask(xaieval::BinaryMask(w, h, bits), std::filesystem::path(out_dir) / (id + ".png"));
    }
    return exit_code;
}
