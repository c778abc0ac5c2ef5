from nsdde.cli.main import main

main()
