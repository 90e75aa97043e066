from spinfloq.cli import main

main()
