from calibrec.experiment.cli import main

raise SystemExit(main())
