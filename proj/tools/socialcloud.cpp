#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <socialcloud/cli.hpp>
#include <socialcloud/experiment.hpp>

int main(int argc, char** argv) {
  using namespace socialcloud;
  std::vector<std::string> args(argv + 1, argv + argc);
  experiment_plan plan;
  try {
    auto parsed = parse_config(args);
    if (!parsed) return 0; // --help
    plan = std::move(*parsed);
  } catch (const std::exception& e) {
    std::cerr << "socialcloud: " << e.what() << '\n';
    return 2;
  }

  try {
    const plan_result result = run_plan(plan);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
      const auto& cell = result.cells[i];
      if (cell.ok) {
        ++ok;
      } else {
        std::cerr << "cell " << i << " failed: " << cell.error << '\n';
      }
    }
    std::cout << ok << "/" << result.cells.size() << " cells ok; manifest at "
              << result.manifest_path << '\n';
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "socialcloud: " << e.what() << '\n';
    return 1;
  }
}
