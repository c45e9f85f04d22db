from diskbio.cli import main


main()
