#include "cli_app.hpp"

int main(int argc, char** argv)
{
    return ctqw::cli::run(argc, argv);
}
