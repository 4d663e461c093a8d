#pragma once

#include <exception>
#include <ostream>

#include "iqp/errors.hpp"

namespace iqp::cli {

template <typename Fn>
int run_guarded(Fn&& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const LimitError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ShapeError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace iqp::cli
