#include "optocorr/error.hpp"

#include <iostream>
#include <mutex>

namespace optocorr {

namespace {

std::string locate(const std::string& what, int line, int column)
{
    if (line <= 0)
        return what;
    std::string s = "line " + std::to_string(line);
    if (column > 0)
        s += ", column " + std::to_string(column);
    return s + ": " + what;
}

std::mutex g_warn_mutex;
WarningHandler g_warn_handler;

} // namespace

ParseError::ParseError(const std::string& what, int line, int column)
    : Error(locate(what, line, column)), line_(line), column_(column)
{
}

void set_warning_handler(WarningHandler h)
{
    std::lock_guard<std::mutex> lock(g_warn_mutex);
    g_warn_handler = std::move(h);
}

void warn(const std::string& msg)
{
    std::lock_guard<std::mutex> lock(g_warn_mutex);
    if (g_warn_handler)
        g_warn_handler(msg);
    else
        std::cerr << "warning: " << msg << '\n';
}

} // namespace optocorr
