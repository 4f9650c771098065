# BusyQ reference data package
