#include "aegis/app/cli.hpp"

int main(int argc, char** argv) { return aegis::app::cli_dispatch(argc, argv); }
