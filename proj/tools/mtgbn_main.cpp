#include <cstdio>

#include "cli_common.hpp"
#include "mtgbn/errors.hpp"

// Exit codes: 0 success, 2 configuration, 3 generation gave up, 4 sampler
// diverged, 5 I/O, 1 anything else.
int main(int argc, char** argv) {
  CLI::App app{"Multitask Gaussian network structure learning"};
  app.set_version_flag("--version", cli::version_string());
  app.require_subcommand(1);

  cli::register_simulate(app);
  cli::register_learn(app);
  cli::register_eval(app);
  cli::register_compare(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const mtgbn::ConfigError& e) {
    std::fprintf(stderr, "error (config): %s\n", e.what());
    return 2;
  } catch (const mtgbn::RetriesExhausted& e) {
    std::fprintf(stderr, "error (generation): %s\n", e.what());
    return 3;
  } catch (const mtgbn::ChainDiverged& e) {
    if (e.em_iteration >= 0) {
      std::fprintf(stderr, "error (sampler, EM iteration %d): %s\n", e.em_iteration, e.what());
    } else {
      std::fprintf(stderr, "error (sampler): %s\n", e.what());
    }
    return 4;
  } catch (const mtgbn::IoError& e) {
    std::fprintf(stderr, "error (io): %s\n", e.what());
    return 5;
  } catch (const cli::json::exception& e) {
    std::fprintf(stderr, "error (config): %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
