# Common package init file
