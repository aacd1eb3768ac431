"""Dynamic membership for regular tree languages, DCFLs and VPLs."""
